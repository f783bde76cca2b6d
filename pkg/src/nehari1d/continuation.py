"""Continuation in the truncation radius with warm starts and limit diagnostics.

Sweeping R upward at (approximately) fixed spacing keeps discretization
error uniform, so trends in the level and in the peak reflect the continuum
limit rather than grid coarsening.  Each solve after the first is
warm-started by zero-extending the previous minimizer and re-projecting it
onto the manifold, which makes the previous solution an admissible
competitor at the larger radius.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Field, Grid, ProblemSpec, gaussian_init, make_grid
from .solver import SolveOptions, SolveResult, minimize_on_nehari
from .variational import project_to_nehari


class SweepFailedError(RuntimeError):
    pass


class TailUndeterminedError(ValueError):
    pass


# relative floor below which tail samples are considered numerical noise
_TAIL_FLOOR_REL = 1e-12


@dataclass(frozen=True)
class TraceEntry:
    radius: float
    level: float
    peak: float
    el_residual_norm: float
    profile_diff: float | None
    converged: bool
    result: SolveResult


@dataclass(frozen=True)
class ContinuationTrace:
    entries: tuple[TraceEntry, ...]
    spec: ProblemSpec
    h_target: float


@dataclass(frozen=True)
class MonotoneCheck:
    passed: bool
    first_violation: int | None
    detail: str


def grid_for_radius(radius: float, h_target: float) -> Grid:
    """Smallest odd node count whose spacing does not exceed h_target."""
    if h_target <= 0.0:
        raise ValueError("h_target must be positive")
    cells = int(np.ceil(2.0 * radius / h_target - 1e-12))
    m = cells + 1
    if m % 2 == 0:
        m += 1
    return make_grid(radius, max(m, 3))


def _zero_extend(prev: Field, grid: Grid) -> Field:
    """Interpolate the previous field onto the larger grid, zero outside."""
    vals = np.empty((prev.n_components, grid.m))
    for j in range(prev.n_components):
        vals[j] = np.interp(grid.nodes, prev.grid.nodes, prev.values[j],
                            left=0.0, right=0.0)
    vals[:, 0] = 0.0
    vals[:, -1] = 0.0
    return Field(values=vals, grid=grid)


def sweep(spec: ProblemSpec, radii, h_target: float,
          opts: SolveOptions | None = None) -> ContinuationTrace:
    """Solve at every radius in increasing order, warm-starting each solve.

    Non-convergent entries are flagged and the sweep continues; if no entry
    converges the sweep fails.
    """
    radii = [float(r) for r in radii]
    if not radii:
        raise ValueError("radius list is empty")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radius list must be strictly increasing")
    if any(r <= 0 for r in radii):
        raise ValueError("radii must be positive")
    if opts is None:
        opts = SolveOptions()

    entries: list[TraceEntry] = []
    prev_field: Field | None = None
    for radius in radii:
        grid = grid_for_radius(radius, h_target)
        if prev_field is None:
            init = gaussian_init(spec, grid)
        else:
            init = project_to_nehari(_zero_extend(prev_field, grid), spec)
        result = minimize_on_nehari(spec, grid, init, opts)
        if prev_field is None:
            profile_diff = None
        else:
            onto_prev = np.empty_like(prev_field.values)
            for j in range(prev_field.n_components):
                onto_prev[j] = np.interp(prev_field.grid.nodes, grid.nodes,
                                         result.field.values[j])
            profile_diff = float(np.max(np.abs(onto_prev - prev_field.values)))
        entries.append(TraceEntry(
            radius=radius,
            level=result.level,
            peak=result.peak,
            el_residual_norm=result.el_residual_norm,
            profile_diff=profile_diff,
            converged=result.converged,
            result=result,
        ))
        if result.converged:
            prev_field = result.field
    if not any(e.converged for e in entries):
        raise SweepFailedError("no radius in the sweep produced a converged solve")
    return ContinuationTrace(entries=tuple(entries), spec=spec, h_target=float(h_target))


def check_monotone_level(trace: ContinuationTrace) -> MonotoneCheck:
    """Levels must stay positive and not increase along the sweep.

    Zero-extension embeds the smaller-interval space into the larger one, so
    the infimum cannot go up; 1e-6 relative slack absorbs solver noise.
    """
    converged = [e for e in trace.entries if e.converged]
    if len(converged) < 2:
        raise ValueError("need at least 2 converged entries")
    for idx, entry in enumerate(converged):
        if not entry.level > 0.0:
            return MonotoneCheck(False, idx, f"level {entry.level:.6g} is not positive "
                                             f"at R={entry.radius:g}")
    for idx in range(1, len(converged)):
        prev, cur = converged[idx - 1], converged[idx]
        if cur.level > prev.level * (1.0 + 1e-6):
            return MonotoneCheck(False, idx,
                                 f"level increased from {prev.level:.12g} (R={prev.radius:g}) "
                                 f"to {cur.level:.12g} (R={cur.radius:g})")
    return MonotoneCheck(True, None, "levels positive and non-increasing")


def check_bounded_peak(trace: ContinuationTrace, window: int = 3) -> str:
    """Classify the peak trend: growing, bounded-converging or bounded-plateau.

    Growing means more than 5% increase per doubling of R over the window;
    bounded-converging means successive peak changes shrink geometrically
    (zero change counts as shrinking).
    """
    converged = [e for e in trace.entries if e.converged]
    if len(converged) < window + 1:
        raise ValueError(f"need at least {window + 1} converged entries")
    tail = converged[-(window + 1):]
    peaks = np.array([e.peak for e in tail])
    radii = np.array([e.radius for e in tail])

    growth_per_doubling = (peaks[1:] / peaks[:-1]) ** (1.0 / np.log2(radii[1:] / radii[:-1]))
    if np.exp(np.mean(np.log(growth_per_doubling))) > 1.05:
        return "growing"

    deltas = np.abs(np.diff(peaks))
    atol = 1e-9 * float(np.max(peaks))
    shrinking = all(deltas[k + 1] <= 0.9 * deltas[k] + atol for k in range(len(deltas) - 1))
    if shrinking:
        return "bounded-converging"
    return "bounded-plateau"


def extract_limit(trace: ContinuationTrace) -> tuple[Field, float]:
    """Final profile plus the exponential tail decay rate.

    The rate is the least-squares slope of log|u| over the outer quarter of
    the numerically supported part of the interval (samples below a noise
    floor of 1e-12 times the peak are excluded).  For constant coefficients
    the rate approaches -sqrt(min lambda).
    """
    final = trace.entries[-1]
    if not final.converged:
        raise ValueError("final sweep entry did not converge")
    field = final.result.field
    nodes = field.grid.nodes
    mag = np.sqrt(np.sum(field.values**2, axis=0))
    floor = _TAIL_FLOOR_REL * float(np.max(mag))
    valid = (np.abs(nodes) > 0.0) & (mag > floor)
    if not np.any(valid):
        raise TailUndeterminedError("no tail samples above the noise floor")
    t_hi = float(np.max(np.abs(nodes[valid])))
    window = valid & (np.abs(nodes) >= 0.5 * t_hi)
    if np.count_nonzero(window) < 4:
        raise TailUndeterminedError("too few tail samples above the noise floor")
    xs = np.abs(nodes[window])
    ys = np.log(mag[window])
    slope, _ = np.polyfit(xs, ys, 1)
    return field, float(slope)
