"""Discrete energy, Nehari-manifold machinery and the blow-up rescaling.

The discrete energy is built so that its exact gradient under the trapezoid
inner product is the standard 3-point finite-difference operator: the
derivative term accumulates squared forward differences cell by cell, the
zero-order and nonlinear terms use the composite trapezoid rule.  Energy and
gradient therefore stay variationally consistent to machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    DimensionMismatchError,
    Field,
    Grid,
    ProblemSpec,
    TabulatedQ,
    eval_q,
)


class NonzeroFieldRequiredError(ValueError):
    pass


class NonlinearTermVanishesError(ValueError):
    pass


class OffManifoldError(ValueError):
    pass


@dataclass(frozen=True)
class EnergyBreakdown:
    """Quadratic part A, nonlinear part B and the energy E = A/2 - B/(p+1)."""

    quadratic: float
    nonlinear: float
    energy: float


def trapezoid_weights(grid: Grid) -> np.ndarray:
    w = np.full(grid.m, grid.h)
    w[0] = 0.5 * grid.h
    w[-1] = 0.5 * grid.h
    return w


def integrate(samples, grid: Grid) -> float:
    """Composite trapezoid rule over the grid."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1 or samples.size != grid.m:
        raise DimensionMismatchError(
            f"expected {grid.m} samples, got shape {samples.shape}"
        )
    return float(grid.h * (np.sum(samples[1:-1]) + 0.5 * (samples[0] + samples[-1])))


def inner_product(a: np.ndarray, b: np.ndarray, grid: Grid) -> float:
    """Trapezoid L2 inner product, summed over components."""
    w = trapezoid_weights(grid)
    return float(np.sum(w * a * b))


def _check_spec_field(u: Field, spec: ProblemSpec):
    if u.n_components != spec.n_components or len(spec.lambdas) != spec.n_components:
        raise DimensionMismatchError(
            f"field has {u.n_components} components, spec declares {spec.n_components}"
        )


def _quadratic_nonlinear(values: np.ndarray, grid: Grid, spec: ProblemSpec):
    """A and B for raw component samples (shared by Field and solver internals)."""
    h = grid.h
    diffs = np.diff(values, axis=1)
    a_deriv = float(np.sum(diffs * diffs)) / h
    w = trapezoid_weights(grid)
    lambdas = np.asarray(spec.lambdas)
    a_mass = float(np.sum(lambdas[:, None] * w[None, :] * values * values))
    sq = np.sum(values * values, axis=0)
    qs = np.asarray(eval_q(spec.q_profile, grid.nodes), dtype=float)
    b = float(np.sum(w * qs * sq ** (0.5 * (spec.p + 1.0))))
    return a_deriv + a_mass, b


def energy_breakdown(u: Field, spec: ProblemSpec) -> EnergyBreakdown:
    """A = int |u'|^2 + sum_j lambda_j (u^j)^2, B = int Q |u|^{p+1}, E = A/2 - B/(p+1)."""
    _check_spec_field(u, spec)
    a, b = _quadratic_nonlinear(u.values, u.grid, spec)
    return EnergyBreakdown(quadratic=a, nonlinear=b, energy=0.5 * a - b / (spec.p + 1.0))


def nehari_residual(u: Field, spec: ProblemSpec) -> float:
    """A - B; zero on the Nehari manifold (the zero field is degenerate)."""
    bd = energy_breakdown(u, spec)
    return bd.quadratic - bd.nonlinear


def nehari_scale(u: Field, spec: ProblemSpec) -> float:
    """Ray factor t* = (A/B)^(1/(p-1)) placing t* u on the Nehari manifold."""
    _check_spec_field(u, spec)
    a, b = _quadratic_nonlinear(u.values, u.grid, spec)
    return _nehari_scale_from_parts(a, b, spec.p)


def _nehari_scale_from_parts(a: float, b: float, p: float) -> float:
    if a <= 0.0:
        # a = 0 only for the zero field; a < 0 needs an invalid negative lambda
        raise NonzeroFieldRequiredError("cannot project onto the manifold: "
                                        f"quadratic part is {a!r}")
    if b <= 0.0:
        raise NonlinearTermVanishesError(
            "nonlinear term vanishes (field supported where Q = 0); no projection exists"
        )
    return float((a / b) ** (1.0 / (p - 1.0)))


def scale_field(u: Field, c: float) -> Field:
    return Field(values=c * u.values, grid=u.grid)


def project_to_nehari(u: Field, spec: ProblemSpec) -> Field:
    return scale_field(u, nehari_scale(u, spec))


def restricted_energy(u_on_manifold: Field, spec: ProblemSpec) -> float:
    """(1/2 - 1/(p+1)) A for a field on the manifold.

    Raises OffManifoldError when |A - B| exceeds 1e-8 * max(A, 1).
    """
    bd = energy_breakdown(u_on_manifold, spec)
    if abs(bd.quadratic - bd.nonlinear) > 1e-8 * max(bd.quadratic, 1.0):
        raise OffManifoldError(
            f"field is off the Nehari manifold: |A-B| = {abs(bd.quadratic - bd.nonlinear):.3e}"
        )
    return (0.5 - 1.0 / (spec.p + 1.0)) * bd.quadratic


def _gradient_values(values: np.ndarray, grid: Grid, spec: ProblemSpec) -> np.ndarray:
    """Interior-node gradient samples; endpoint columns are zero."""
    h2 = grid.h * grid.h
    lambdas = np.asarray(spec.lambdas)
    qs = np.asarray(eval_q(spec.q_profile, grid.nodes), dtype=float)
    absu = np.sqrt(np.sum(values * values, axis=0))
    # p > 1 so |u|^{p-1} -> 0 at u = 0; the power itself is safe
    nonlin = qs * absu ** (spec.p - 1.0)
    out = np.zeros_like(values)
    lap = values[:, :-2] - 2.0 * values[:, 1:-1] + values[:, 2:]
    out[:, 1:-1] = (-lap / h2
                    + lambdas[:, None] * values[:, 1:-1]
                    - nonlin[None, 1:-1] * values[:, 1:-1])
    return out


def el_residual(u: Field, spec: ProblemSpec) -> Field:
    """Pointwise residual of -(u^j)'' + lambda_j u^j - Q |u|^{p-1} u^j.

    Second-order central stencil on interior nodes; endpoints carry zero by
    convention.
    """
    _check_spec_field(u, spec)
    return Field(values=_gradient_values(u.values, u.grid, spec), grid=u.grid)


def el_residual_norm(u: Field, spec: ProblemSpec) -> float:
    """Sup norm of the interior residual."""
    return float(np.max(np.abs(_gradient_values(u.values, u.grid, spec))))


def energy_gradient(u: Field, spec: ProblemSpec) -> Field:
    """First variation of the discrete energy under the trapezoid metric.

    Identical samples to el_residual; read as the steepest-descent direction
    within the zero-boundary space.
    """
    return el_residual(u, spec)


@dataclass(frozen=True)
class RescaledState:
    """Output of the peak rescaling: field on the dilated grid plus the
    transported coefficient profile and the leftover linear coefficients."""

    field: Field
    q_profile: TabulatedQ
    peak_scale: float
    beta: float
    leftover_lambdas: tuple[float, ...]


def blowup_rescale(u: Field, peak: float, spec: ProblemSpec) -> RescaledState:
    """Rescale v(t) = u(M^beta t) / M with beta = (1-p)/2 < 0.

    The output grid has radius R * M^(-beta) and the same node count, so the
    sample points map back exactly onto the original nodes.  The coefficient
    is transported as a tabulated profile Q_M(t) = Q(M^beta t), and each
    lambda_j picks up the factor M^(1-p).
    """
    if not peak > 0.0:
        raise ValueError(f"rescaling peak must be positive, got {peak}")
    beta = 0.5 * (1.0 - spec.p)
    grid = u.grid
    new_radius = grid.radius * peak ** (-beta)
    new_grid = Grid(radius=new_radius, m=grid.m)
    back = peak**beta * new_grid.nodes  # lands on the old nodes up to rounding
    vals = np.empty_like(u.values)
    for j in range(u.n_components):
        vals[j] = np.interp(back, grid.nodes, u.values[j]) / peak
    vals[:, 0] = 0.0
    vals[:, -1] = 0.0
    q_samples = np.asarray(eval_q(spec.q_profile, peak**beta * new_grid.nodes), dtype=float)
    q_m = TabulatedQ(radius=new_radius, values=q_samples)
    leftover = tuple(l * peak ** (1.0 - spec.p) for l in spec.lambdas)
    return RescaledState(
        field=Field(values=vals, grid=new_grid),
        q_profile=q_m,
        peak_scale=float(peak),
        beta=beta,
        leftover_lambdas=leftover,
    )
