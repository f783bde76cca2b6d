"""Problem definitions, coefficient profiles, grids and discrete fields.

Everything downstream consumes these types: a ProblemSpec fixes the coupled
system -(u^j)'' + lambda_j u^j = Q(t)|u|^{p-1} u^j, a Grid discretizes the
truncated interval [-R, R] with zero boundary values, and a Field holds the
sampled components.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np


class InvalidGridError(ValueError):
    pass


class DimensionMismatchError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Coefficient profiles
# ---------------------------------------------------------------------------

class QProfile:
    """Even, bounded, non-negative coefficient profile, evaluable at any t."""

    kind = "abstract"

    def __call__(self, t):
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantQ(QProfile):
    c: float = 1.0
    kind = "constant"

    def __call__(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.c) if np.ndim(t) else float(self.c)


@dataclass(frozen=True)
class GaussianQ(QProfile):
    amplitude: float = 1.0
    width: float = 1.0
    kind = "gaussian"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = self.amplitude * np.exp(-(t * t) / (2.0 * self.width**2))
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class RationalQ(QProfile):
    """amplitude / (1 + (t/scale)^2)."""

    amplitude: float = 1.0
    scale: float = 1.0
    kind = "rational"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = self.amplitude / (1.0 + (t / self.scale) ** 2)
        return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class TabulatedQ(QProfile):
    """Samples on a uniform symmetric grid over [-radius, radius].

    Evaluation interpolates linearly and clamps to the outermost sample
    beyond the table, preserving boundedness.
    """

    radius: float
    values: np.ndarray
    kind = "tabulated"

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("tabulated profile needs a 1-d table with at least 2 samples")
        if self.radius <= 0:
            raise ValueError("tabulated profile radius must be positive")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def sample_points(self) -> np.ndarray:
        return np.linspace(-self.radius, self.radius, self.values.size)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.interp(t, self.sample_points, self.values)  # np.interp clamps at the ends
        return out if out.ndim else float(out)


def eval_q(profile: QProfile, t):
    """Value of Q at t (scalar or array)."""
    return profile(t)


# ---------------------------------------------------------------------------
# Problem statement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProblemSpec:
    """The coupled system -(u^j)'' + lambda_j u^j = Q(t)|u|^{p-1} u^j on the line.

    The single-coefficient scalar equation is the case n_components=1 with
    lambdas=(a,).  Hypotheses (p > 1, lambdas positive, Q even/non-negative
    with Q(0) > 0) are reported by validate_problem, not enforced here.
    """

    n_components: int
    p: float
    lambdas: tuple[float, ...]
    q_profile: QProfile

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(float(l) for l in self.lambdas))


def validate_problem(spec: ProblemSpec, probe_radius: float = 1.0) -> list[str]:
    """Check the standing hypotheses; returns every violation found.

    Violations are data, not failures: an empty list means all hypotheses
    hold.  Evenness and non-negativity of Q are sampled on 101 points over
    [-10*probe_radius, 10*probe_radius] with tolerance 1e-12.
    """
    violations = []
    if spec.n_components < 1:
        violations.append("n_components must be at least 1")
    if len(spec.lambdas) != spec.n_components:
        violations.append(
            f"lambdas has {len(spec.lambdas)} entries, expected {spec.n_components}"
        )
    if not spec.p > 1.0:
        violations.append("p must exceed 1")
    for j, lam in enumerate(spec.lambdas):
        if not lam > 0.0:
            violations.append(f"lambda_{j + 1} must be positive (got {lam})")

    q = spec.q_profile
    q0 = float(eval_q(q, 0.0))
    if not q0 > 0.0:
        violations.append(f"Q(0) must be positive (got {q0})")
    ts = np.linspace(-10.0 * probe_radius, 10.0 * probe_radius, 101)
    qs = np.asarray(eval_q(q, ts), dtype=float)
    qs_mirror = np.asarray(eval_q(q, -ts), dtype=float)
    if np.max(np.abs(qs - qs_mirror)) > 1e-12:
        violations.append("Q must be even: Q(t) != Q(-t) beyond tolerance on sample")
    if np.min(qs) < -1e-12:
        violations.append("Q must be non-negative: negative sample values found")
    if not np.all(np.isfinite(qs)):
        violations.append("Q must be bounded: non-finite sample values found")
    return violations


# ---------------------------------------------------------------------------
# Grid and field
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform Dirichlet grid on [-R, R] with an odd node count.

    Oddness puts t=0 exactly at the center node, so peak values at the
    origin never interpolate.  Interior nodes are mirror-exact pairs.
    """

    radius: float
    m: int
    h: float = dc_field(init=False)
    nodes: np.ndarray = dc_field(init=False)

    def __post_init__(self):
        if self.m < 3 or self.m % 2 == 0:
            raise InvalidGridError(f"node count must be an odd integer >= 3, got {self.m}")
        if not self.radius > 0.0:
            raise InvalidGridError(f"radius must be positive, got {self.radius}")
        h = 2.0 * self.radius / (self.m - 1)
        center = (self.m - 1) // 2
        # build as signed offsets from the center so t_i == -t_{m-1-i} bitwise
        nodes = (np.arange(self.m) - center) * h
        nodes[0] = -self.radius
        nodes[-1] = self.radius
        nodes.flags.writeable = False
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "nodes", nodes)

    @property
    def center_index(self) -> int:
        return (self.m - 1) // 2


def make_grid(radius: float, m: int) -> Grid:
    """Uniform grid on [-R, R]; m must be odd and >= 3."""
    return Grid(radius=float(radius), m=int(m))


@dataclass(frozen=True, eq=False)
class Field:
    """N x m sample array of a vector-valued function vanishing at +-R."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[np.newaxis, :]
        if vals.ndim != 2 or vals.shape[1] != self.grid.m:
            raise DimensionMismatchError(
                f"field values shape {vals.shape} does not match grid with m={self.grid.m}"
            )
        if np.any(vals[:, 0] != 0.0) or np.any(vals[:, -1] != 0.0):
            raise ValueError("field must vanish at the two endpoint nodes")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def n_components(self) -> int:
        return self.values.shape[0]


def field_from_samples(grid: Grid, values, clamp_ends: bool = True) -> Field:
    """Wrap raw samples into a Field, zeroing the endpoint nodes by default."""
    vals = np.array(values, dtype=float)
    if vals.ndim == 1:
        vals = vals[np.newaxis, :]
    if clamp_ends and vals.shape[-1] >= 2:
        vals[:, 0] = 0.0
        vals[:, -1] = 0.0
    return Field(values=vals, grid=grid)


def gaussian_init(spec: ProblemSpec, grid: Grid, amplitudes=None, width: float = 1.0) -> Field:
    """Gaussian bump initial guess, one amplitude per component.

    Component j is amplitudes[j] * exp(-t^2 / (2 width^2)) at interior nodes
    and exactly zero at the endpoints.
    """
    if amplitudes is None:
        amplitudes = (1.0,) * spec.n_components
    amplitudes = tuple(float(a) for a in amplitudes)
    if len(amplitudes) != spec.n_components:
        raise DimensionMismatchError(
            f"{len(amplitudes)} amplitudes for {spec.n_components} components"
        )
    if not width > 0.0:
        raise ValueError("width must be positive")
    if any(a <= 0.0 for a in amplitudes):
        raise ValueError("amplitudes must be positive")
    bump = np.exp(-grid.nodes**2 / (2.0 * width * width))
    vals = np.outer(amplitudes, bump)
    vals[:, 0] = 0.0
    vals[:, -1] = 0.0
    return Field(values=vals, grid=grid)
