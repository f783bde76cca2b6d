"""Nehari-manifold minimizer on a fixed truncated interval.

The scheme is projected gradient flow: every iterate is replaced by its
componentwise absolute value (energy never increases under this for the
functional at hand), optionally symmetrized, re-projected onto the manifold
by the closed-form ray factor, and then moved along the tangent part of the
energy gradient with a backtracking Armijo line search.  A damped Newton
pass on the discrete Euler-Lagrange system polishes the result to stencil
accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field, replace
import warnings

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from .model import Field, Grid, ProblemSpec, eval_q
from .variational import (
    EnergyBreakdown,
    NonzeroFieldRequiredError,
    _gradient_values,
    _nehari_scale_from_parts,
    _quadratic_nonlinear,
    trapezoid_weights,
)


class AllTrivialComponentsError(ValueError):
    pass


# schedule for opportunistic Newton polish attempts during the gradient flow:
# first on the clean projected init (warm starts are already in the basin),
# then periodically; attempts are validated (residual + energy descent) and
# rejected if they leave the non-negative symmetric solution class
_NEWTON_BURN_IN = 1
_NEWTON_PERIOD = 50
_MIN_STEP = 1e-18


@dataclass(frozen=True)
class SolveOptions:
    max_iters: int = 20000
    tol_grad: float = 1e-8
    step0: float = 1.0
    backtrack: float = 0.5
    armijo: float = 1e-4
    enforce_symmetry: bool = True
    newton_refine: bool = True
    trivial_threshold: float = 1e-8

    def __post_init__(self):
        if self.tol_grad <= 0 or self.step0 <= 0 or self.trivial_threshold <= 0:
            raise ValueError("tolerances and step sizes must be positive")
        if not (0.0 < self.backtrack < 1.0 and 0.0 < self.armijo < 1.0):
            raise ValueError("backtrack and armijo factors must lie in (0, 1)")


@dataclass(frozen=True)
class SolveResult:
    field: Field
    level: float
    breakdown: EnergyBreakdown
    peak: float
    peak_component: int
    peak_location: float
    el_residual_norm: float
    nehari_residual: float
    iterations: int
    converged: bool
    dropped_components: tuple[int, ...] = ()
    energy_history: tuple[float, ...] = dc_field(default=(), repr=False)


@dataclass(frozen=True)
class NewtonRefineResult:
    field: Field
    converged: bool
    iterations: int
    residual_norm: float


def max_stats(field: Field) -> tuple[float, int, float]:
    """Global maximum over components and nodes.

    Returns (value, component, location) with the component index 1-based.
    Ties break to the lowest component, then the node closest to the origin,
    then the leftmost node.
    """
    vals = field.values
    if not np.any(vals != 0.0):
        raise NonzeroFieldRequiredError("max_stats needs a nonzero field")
    peak = float(np.max(vals))
    comps, nodes = np.nonzero(vals == peak)
    ts = field.grid.nodes[nodes]
    order = np.lexsort((ts, np.abs(ts), comps))
    best = order[0]
    return peak, int(comps[best]) + 1, float(ts[best])


def check_symmetry(field: Field) -> float:
    """Sup over components and nodes of |u(t) - u(-t)| by exact node mirroring."""
    vals = field.values
    return float(np.max(np.abs(vals - vals[:, ::-1])))


def _symmetrize(values: np.ndarray) -> np.ndarray:
    return 0.5 * (values + values[:, ::-1])


def _tangent_norm_sq(g: np.ndarray, u: np.ndarray, w: np.ndarray):
    """Remove the component of g along u in the trapezoid metric."""
    gu = float(np.sum(w * g * u))
    uu = float(np.sum(w * u * u))
    tangent = g - (gu / uu) * u
    return tangent, float(np.sum(w * tangent * tangent))


def _projected_energy(values: np.ndarray, grid: Grid, spec: ProblemSpec):
    """Energy after ray re-projection, or None when the trial is degenerate."""
    a, b = _quadratic_nonlinear(values, grid, spec)
    if a <= 0.0 or b <= 0.0:
        return None, None
    t_star = _nehari_scale_from_parts(a, b, spec.p)
    energy = 0.5 * t_star**2 * a - t_star ** (spec.p + 1.0) * b / (spec.p + 1.0)
    return energy, t_star


def minimize_on_nehari(spec: ProblemSpec, grid: Grid, init: Field,
                       opts: SolveOptions | None = None) -> SolveResult:
    """Find the constrained minimizer starting from init.

    Parameters
    ----------
    spec : ProblemSpec
        Problem statement; hypotheses are assumed to hold.
    grid : Grid
        Discretization of [-R, R]; must match init.grid.
    init : Field
        Nonzero starting guess whose nonlinear term does not vanish.
    opts : SolveOptions
        Iteration controls; defaults are robust across grid resolutions.

    Returns
    -------
    SolveResult with the minimizer, its level, peak statistics and residual
    norms.  converged=False (with partial data) when the iteration budget is
    exhausted before the tolerance is met.
    """
    if opts is None:
        opts = SolveOptions()
    if init.grid.m != grid.m or init.grid.radius != grid.radius:
        raise ValueError("init field lives on a different grid")
    u = init.values.copy()
    if not np.any(u != 0.0):
        raise NonzeroFieldRequiredError("initial field is zero")
    _, b0 = _quadratic_nonlinear(u, grid, spec)
    if b0 <= 0.0:
        raise NonzeroFieldRequiredError("nonlinear term vanishes on the initial field")

    w = trapezoid_weights(grid)
    step = opts.step0
    energies: list[float] = []
    iterations = 0
    converged = False
    newton_iters = 0
    newton_done = False
    next_newton = _NEWTON_BURN_IN if opts.newton_refine else None

    for iterations in range(1, opts.max_iters + 1):
        u = np.abs(u)
        if opts.enforce_symmetry:
            u = _symmetrize(u)
        a, b = _quadratic_nonlinear(u, grid, spec)
        t_star = _nehari_scale_from_parts(a, b, spec.p)
        u *= t_star
        a, b = t_star**2 * a, t_star ** (spec.p + 1.0) * b
        energy = 0.5 * a - b / (spec.p + 1.0)

        g = _gradient_values(u, grid, spec)
        tangent, tnorm_sq = _tangent_norm_sq(g, u, w)
        tnorm = np.sqrt(tnorm_sq)
        if tnorm <= opts.tol_grad * max(1.0, a):
            converged = True
            energies.append(energy)
            break

        if next_newton is not None and iterations >= next_newton:
            next_newton = iterations + _NEWTON_PERIOD
            accepted_vals, n_it, cand_energy = _try_newton_polish(
                spec, grid, u, energy, opts.enforce_symmetry)
            if accepted_vals is not None:
                u = accepted_vals
                newton_iters += n_it
                newton_done = True
                energies.append(cand_energy)
                break

        direction = tangent / tnorm
        step = min(2.0 * step, 1e6)
        accepted = False
        while step >= _MIN_STEP:
            trial = u - step * direction
            trial_energy, trial_scale = _projected_energy(trial, grid, spec)
            if trial_energy is not None and trial_energy <= energy - opts.armijo * step * tnorm:
                u = trial_scale * trial
                accepted = True
                break
            step *= opts.backtrack
        energies.append(energy)
        if not accepted:
            # line search exhausted: flat to machine precision
            break

    if opts.newton_refine and not newton_done:
        refined = newton_refine(spec, grid, Field(values=_clamped(u), grid=grid),
                                symmetrize=opts.enforce_symmetry)
        if refined.converged:
            u = refined.field.values.copy()
            newton_iters += refined.iterations

    u = np.abs(u)
    if opts.enforce_symmetry:
        u = _symmetrize(u)
    u = _clamped(u)

    a, b = _quadratic_nonlinear(u, grid, spec)
    g = _gradient_values(u, grid, spec)
    tangent, tnorm_sq = _tangent_norm_sq(g, u, w)
    if np.sqrt(tnorm_sq) <= opts.tol_grad * max(1.0, a):
        converged = True

    field = Field(values=u, grid=grid)
    breakdown = EnergyBreakdown(quadratic=a, nonlinear=b,
                                energy=0.5 * a - b / (spec.p + 1.0))
    peak, peak_component, peak_location = max_stats(field)
    return SolveResult(
        field=field,
        level=(0.5 - 1.0 / (spec.p + 1.0)) * a,
        breakdown=breakdown,
        peak=peak,
        peak_component=peak_component,
        peak_location=peak_location,
        el_residual_norm=float(np.max(np.abs(g))),
        nehari_residual=a - b,
        iterations=iterations + newton_iters,
        converged=converged,
        energy_history=tuple(energies),
    )


def _clamped(values: np.ndarray) -> np.ndarray:
    out = values.copy()
    out[:, 0] = 0.0
    out[:, -1] = 0.0
    return out


def _try_newton_polish(spec: ProblemSpec, grid: Grid, u: np.ndarray,
                       energy: float, symmetrize: bool):
    """Run the Newton polish and validate the candidate.

    Accepted only when the polished field survives the non-negativity and
    symmetry replacements with a still-tiny residual and does not raise the
    energy; otherwise the gradient flow continues from where it was.
    """
    refined = newton_refine(spec, grid, Field(values=_clamped(u), grid=grid),
                            symmetrize=symmetrize)
    if not refined.converged:
        return None, 0, None
    cand = np.abs(refined.field.values)
    if symmetrize:
        cand = _symmetrize(cand)
    sup = float(np.max(np.abs(cand)))
    res = float(np.max(np.abs(_gradient_values(cand, grid, spec))))
    if res > 1e-8 * (1.0 + sup):
        return None, 0, None
    a, b = _quadratic_nonlinear(cand, grid, spec)
    cand_energy = 0.5 * a - b / (spec.p + 1.0)
    if cand_energy > energy + 1e-12 * (1.0 + abs(energy)):
        return None, 0, None
    return cand, refined.iterations, cand_energy


# ---------------------------------------------------------------------------
# Newton polish of the discrete Euler-Lagrange system
# ---------------------------------------------------------------------------

def _newton_jacobian_banded(values: np.ndarray, grid: Grid, spec: ProblemSpec,
                            shift: float) -> np.ndarray:
    """Banded (LAPACK layout) Jacobian of the interior residual.

    Unknowns are node-major: index = interior_node * N + component.  The
    |u|^{p-1} u^j term couples components within a node; node neighbours
    couple only like components, so the bandwidth is N.
    """
    n_comp, m = values.shape
    n_int = m - 2
    n = n_int * n_comp
    h2 = grid.h * grid.h
    lambdas = np.asarray(spec.lambdas)
    qs = np.asarray(eval_q(spec.q_profile, grid.nodes), dtype=float)[1:-1]
    interior = values[:, 1:-1]
    absu = np.sqrt(np.sum(interior * interior, axis=0))
    pow_p1 = absu ** (spec.p - 1.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(absu > 0.0, interior / absu, 0.0)

    band = np.zeros((2 * n_comp + 1, n))
    center = n_comp  # row of the main diagonal in LAPACK banded storage
    idx = np.arange(n_int)
    for j in range(n_comp):
        cols = idx * n_comp + j
        diag = 2.0 / h2 + lambdas[j] + shift
        diag = diag - qs * (pow_p1 + (spec.p - 1.0) * pow_p1 * unit[j] * unit[j])
        band[center, cols] = diag
        # like-component coupling to the neighbouring nodes
        band[center - n_comp, cols[1:]] = -1.0 / h2
        band[center + n_comp, cols[:-1]] = -1.0 / h2
        for k in range(n_comp):
            if k == j:
                continue
            off = (spec.p - 1.0) * qs * pow_p1 * unit[j] * unit[k]
            # entry (row=node*N+j, col=node*N+k): band[center + j - k, col]
            band[center + j - k, idx * n_comp + k] = -off
    return band


def newton_refine(spec: ProblemSpec, grid: Grid, field: Field,
                  max_newton: int = 30, symmetrize: bool = False) -> NewtonRefineResult:
    """Damped Newton on the discrete Euler-Lagrange system.

    Reduces the interior residual sup norm to 1e-10 * (1 + sup|u|) or
    returns the input with converged=False when no progress is possible
    (including the singular-Jacobian case, handled by a Tikhonov shift).

    With symmetrize=True every iterate is reflected-averaged, which pins the
    otherwise numerically free translation mode of localized solutions.
    """
    u = field.values.copy()
    if symmetrize:
        u = _symmetrize(u)
    n_comp, m = u.shape
    tol = 1e-10 * (1.0 + float(np.max(np.abs(u))))
    res = _gradient_values(u, grid, spec)
    res_norm = float(np.max(np.abs(res)))
    if res_norm <= tol:
        return NewtonRefineResult(field=Field(values=_clamped(u), grid=grid),
                                  converged=True, iterations=0,
                                  residual_norm=res_norm)
    if res_norm > 1.0 + float(np.max(np.abs(u))):
        # too far from any solution for a polish pass
        return NewtonRefineResult(field=field, converged=False, iterations=0,
                                  residual_norm=res_norm)

    shift = 0.0
    base_shift = 1e-12 * (2.0 / grid.h**2 + float(np.max(spec.lambdas)))
    iterations = 0
    for iterations in range(1, max_newton + 1):
        rhs = -res[:, 1:-1].T.reshape(-1)  # node-major
        band = _newton_jacobian_banded(u, grid, spec, shift)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("error")
                delta = solve_banded((n_comp, n_comp), band, rhs)
        except (LinAlgError, Warning):
            shift = base_shift if shift == 0.0 else shift * 100.0
            if shift > 1e6:
                break
            continue
        if not np.all(np.isfinite(delta)):
            shift = base_shift if shift == 0.0 else shift * 100.0
            if shift > 1e6:
                break
            continue
        step = np.zeros_like(u)
        step[:, 1:-1] = delta.reshape(m - 2, n_comp).T
        alpha = 1.0
        improved = False
        while alpha >= 1e-4:
            trial = u + alpha * step
            if symmetrize:
                trial = _symmetrize(trial)
            trial_res = _gradient_values(trial, grid, spec)
            trial_norm = float(np.max(np.abs(trial_res)))
            if trial_norm <= tol:
                # done regardless of the decrease test; near-singular
                # translation modes make full steps oscillate around the root
                return NewtonRefineResult(field=Field(values=_clamped(trial), grid=grid),
                                          converged=True, iterations=iterations,
                                          residual_norm=trial_norm)
            if trial_norm < (1.0 - 1e-4 * alpha) * res_norm:
                if alpha == 1.0 and trial_norm < 0.1 * res_norm:
                    shift = 0.0  # back on the fast track
                u, res, res_norm = trial, trial_res, trial_norm
                improved = True
                break
            alpha *= 0.5
        if not improved:
            if shift <= base_shift * 1e4:
                shift = base_shift if shift == 0.0 else shift * 100.0
                continue
            break
    return NewtonRefineResult(field=field, converged=False, iterations=iterations,
                              residual_norm=res_norm)


def drop_trivial_components(result: SolveResult, opts: SolveOptions,
                            spec: ProblemSpec) -> SolveResult:
    """Zero out components below trivial_threshold * peak and re-project.

    The remaining components are rescaled back onto the manifold and every
    derived quantity is recomputed.  Raises AllTrivialComponentsError when
    nothing survives.
    """
    vals = result.field.values
    sup = np.max(np.abs(vals), axis=1)
    keep = sup >= opts.trivial_threshold * result.peak
    if not np.any(keep):
        raise AllTrivialComponentsError("every component is below the trivial threshold")
    dropped = tuple(int(j) + 1 for j in np.nonzero(~keep)[0])
    if not dropped:
        return result
    grid = result.field.grid
    new_vals = np.where(keep[:, None], vals, 0.0)
    a, b = _quadratic_nonlinear(new_vals, grid, spec)
    t_star = _nehari_scale_from_parts(a, b, spec.p)
    new_vals = t_star * new_vals
    a, b = t_star**2 * a, t_star ** (spec.p + 1.0) * b
    field = Field(values=new_vals, grid=grid)
    peak, peak_component, peak_location = max_stats(field)
    g = _gradient_values(new_vals, grid, spec)
    return replace(
        result,
        field=field,
        level=(0.5 - 1.0 / (spec.p + 1.0)) * a,
        breakdown=EnergyBreakdown(quadratic=a, nonlinear=b,
                                  energy=0.5 * a - b / (spec.p + 1.0)),
        peak=peak,
        peak_component=peak_component,
        peak_location=peak_location,
        el_residual_norm=float(np.max(np.abs(g))),
        nehari_residual=a - b,
        dropped_components=result.dropped_components + dropped,
    )
