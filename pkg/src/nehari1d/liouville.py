"""Shooting certifier for the autonomous limit equation -f'' = q0 f^p.

Positive solutions of the limit equation are strictly concave, so every
trajectory launched from f(0) > 0 must leave the positive half-plane in at
least one time direction.  The scan below exhibits this on a slope grid:
a numerical shadow of the nonexistence argument for bounded positive
solutions on the whole line.  The module also provides the closed-form
sech-power soliton used as the exactness oracle throughout the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ConstantQ, Field, ProblemSpec
from .variational import _gradient_values


@dataclass(frozen=True)
class Trajectory:
    """Dense RK4 output for one time direction (times signed)."""

    times: np.ndarray
    f: np.ndarray
    slope: np.ndarray


@dataclass(frozen=True)
class ShootResult:
    f0: float
    s0: float
    exit_time_forward: float | None
    exit_time_backward: float | None
    slope_max: float
    classification: str  # exits-positivity-both | exits-positivity-one-side | undetermined
    forward: Trajectory | None = None
    backward: Trajectory | None = None


@dataclass(frozen=True)
class SolitonParams:
    """Closed-form homoclinic of -u'' + lambda u = q0 u^p on the line."""

    lam: float
    q0: float
    p: float

    def __post_init__(self):
        if self.lam <= 0 or self.q0 <= 0 or self.p <= 1:
            raise ValueError("soliton parameters need lambda > 0, q0 > 0, p > 1")

    @property
    def amplitude(self) -> float:
        return (self.lam * (self.p + 1.0) / (2.0 * self.q0)) ** (1.0 / (self.p - 1.0))

    @property
    def rate(self) -> float:
        return 0.5 * (self.p - 1.0) * np.sqrt(self.lam)


def soliton_profile(params: SolitonParams, t):
    """amplitude * sech^(2/(p-1))(rate * t); solves the scalar equation exactly."""
    t = np.asarray(t, dtype=float)
    out = params.amplitude * np.cosh(params.rate * t) ** (-2.0 / (params.p - 1.0))
    return out if out.ndim else float(out)


def soliton_field(params: SolitonParams, grid, n_components: int = 1,
                  direction=None) -> Field:
    """Sample the soliton onto a grid, split across components by direction."""
    if direction is None:
        direction = np.ones(n_components) / np.sqrt(n_components)
    direction = np.asarray(direction, dtype=float)
    profile = soliton_profile(params, grid.nodes)
    vals = np.outer(direction, profile)
    vals[:, 0] = 0.0
    vals[:, -1] = 0.0
    return Field(values=vals, grid=grid)


def _positive_power(f: np.ndarray, p: float) -> np.ndarray:
    # positive branch only; the extension by zero is C^1 for p > 1
    return np.where(f > 0.0, np.abs(f) ** p, 0.0)


def _rk4_step(f, s, dt, q0, p):
    k1f = s
    k1s = -q0 * _positive_power(f, p)
    f2 = f + 0.5 * dt * k1f
    k2f = s + 0.5 * dt * k1s
    k2s = -q0 * _positive_power(f2, p)
    f3 = f + 0.5 * dt * k2f
    k3f = s + 0.5 * dt * k2s
    k3s = -q0 * _positive_power(f3, p)
    f4 = f + dt * k3f
    k4f = s + dt * k3s
    k4s = -q0 * _positive_power(f4, p)
    f_new = f + dt / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f)
    s_new = s + dt / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
    return f_new, s_new


def _bisect_exit(f, s, t, dt, q0, p):
    """Refine the exit time inside one step to 1e-10 by bisection on theta*dt."""
    lo, hi = 0.0, 1.0
    while abs(hi - lo) * abs(dt) > 1e-10:
        mid = 0.5 * (lo + hi)
        f_mid, _ = _rk4_step(f, s, mid * dt, q0, p)
        if f_mid > 0.0:
            lo = mid
        else:
            hi = mid
    return t + hi * dt


def _integrate_batch(f0: np.ndarray, s0: np.ndarray, q0: float, p: float,
                     t_max: float, dt: float, keep: bool):
    """March all trajectories in one direction until exit or |t| = t_max.

    dt carries the direction sign.  Returns exit times (nan where positive
    throughout), the running max of |f'| and, when keep is set, the dense
    trajectories (one per launch).
    """
    n = f0.size
    f = f0.copy()
    s = s0.copy()
    n_steps = int(np.ceil(t_max / abs(dt) - 1e-12))
    active = np.ones(n, dtype=bool)
    exit_times = np.full(n, np.nan)
    slope_max = np.abs(s0).copy()
    history = None
    if keep:
        history = (np.empty((n_steps + 1, n)), np.empty((n_steps + 1, n)),
                   np.empty(n_steps + 1))
        history[0][0] = f
        history[1][0] = s
        history[2][0] = 0.0
    filled = 1
    t = 0.0
    for step in range(n_steps):
        f_new, s_new = _rk4_step(f, s, dt, q0, p)
        t_new = t + dt
        crossed = active & (f_new <= 0.0)
        for i in np.nonzero(crossed)[0]:
            exit_times[i] = _bisect_exit(f[i], s[i], t, dt, q0, p)
        active = active & ~crossed
        f = np.where(active, f_new, f)
        s = np.where(active, s_new, s)
        slope_max = np.maximum(slope_max, np.where(active, np.abs(s_new), slope_max))
        if keep:
            history[0][filled] = f_new
            history[1][filled] = s_new
            history[2][filled] = t_new
            filled += 1
        t = t_new
        if not np.any(active):
            break
    traj = None
    if keep:
        traj = (history[0][:filled], history[1][:filled], history[2][:filled])
    return exit_times, slope_max, traj


def shoot(q0: float, p: float, f0: float, s0: float, t_max: float, dt: float,
          keep_trajectory: bool = True) -> ShootResult:
    """Integrate -f'' = q0 f^p from (f0, s0) forward and backward from t=0.

    Exit times (first crossing of f = 0) are located by bisection inside the
    bracketing step to 1e-10 in time.
    """
    if dt <= 0.0 or t_max <= 0.0:
        raise ValueError("t_max and dt must be positive")
    if q0 <= 0.0:
        raise ValueError("q0 must be positive (the limit coefficient is Q(0) > 0)")
    if p <= 1.0:
        raise ValueError("p must exceed 1")
    if f0 <= 0.0:
        raise ValueError("f0 must be positive")

    f0a = np.array([float(f0)])
    s0a = np.array([float(s0)])
    exit_fwd, smax_fwd, hist_fwd = _integrate_batch(f0a, s0a, q0, p, t_max, dt,
                                                    keep_trajectory)
    exit_bwd, smax_bwd, hist_bwd = _integrate_batch(f0a, s0a, q0, p, t_max, -dt,
                                                    keep_trajectory)
    ef = None if np.isnan(exit_fwd[0]) else float(exit_fwd[0])
    eb = None if np.isnan(exit_bwd[0]) else float(exit_bwd[0])
    n_exits = (ef is not None) + (eb is not None)
    classification = {2: "exits-positivity-both",
                      1: "exits-positivity-one-side",
                      0: "undetermined"}[n_exits]
    fwd = bwd = None
    if keep_trajectory:
        fwd = Trajectory(times=hist_fwd[2], f=hist_fwd[0][:, 0], slope=hist_fwd[1][:, 0])
        bwd = Trajectory(times=hist_bwd[2], f=hist_bwd[0][:, 0], slope=hist_bwd[1][:, 0])
    return ShootResult(
        f0=float(f0), s0=float(s0),
        exit_time_forward=ef, exit_time_backward=eb,
        slope_max=float(max(smax_fwd[0], smax_bwd[0])),
        classification=classification,
        forward=fwd, backward=bwd,
    )


def classify_scan(q0: float, p: float, s_grid, t_max: float, dt: float):
    """Shoot from (1, s0) for every s0; summarize the positivity exits.

    The verdict is "nonexistence-consistent" when every trajectory exits
    positivity in at least one direction within the window, and
    "counterexample-found" when some trajectory stays positive on the whole
    observed window [-t_max, t_max] (a bounded positive solution there would
    contradict the nonexistence claim; at small t_max it only means the
    window was too short).
    """
    s_grid = np.asarray(list(s_grid), dtype=float)
    if s_grid.size == 0:
        raise ValueError("slope grid is empty")
    if dt <= 0.0 or t_max <= 0.0:
        raise ValueError("t_max and dt must be positive")
    if q0 <= 0.0:
        raise ValueError("q0 must be positive (the limit coefficient is Q(0) > 0)")
    if p <= 1.0:
        raise ValueError("p must exceed 1")

    ones = np.ones_like(s_grid)
    exit_fwd, smax_fwd, _ = _integrate_batch(ones, s_grid, q0, p, t_max, dt, False)
    exit_bwd, smax_bwd, _ = _integrate_batch(ones, s_grid, q0, p, t_max, -dt, False)
    rows = []
    for i, s0 in enumerate(s_grid):
        ef = None if np.isnan(exit_fwd[i]) else float(exit_fwd[i])
        eb = None if np.isnan(exit_bwd[i]) else float(exit_bwd[i])
        n_exits = (ef is not None) + (eb is not None)
        rows.append(ShootResult(
            f0=1.0, s0=float(s0),
            exit_time_forward=ef, exit_time_backward=eb,
            slope_max=float(max(smax_fwd[i], smax_bwd[i])),
            classification={2: "exits-positivity-both",
                            1: "exits-positivity-one-side",
                            0: "undetermined"}[n_exits],
        ))
    verdict = ("nonexistence-consistent"
               if all(r.classification != "undetermined" for r in rows)
               else "counterexample-found")
    return rows, verdict


def residual_of_limit_candidate(field: Field, q0: float, p: float) -> float:
    """Sup norm of -v'' - q0 |v|^{p-1} v on interior nodes (no linear term).

    Measures how close a rescaled profile is to solving the limit equation;
    for exact solitons rescaled by M the leftover is lambda * M^(1-p) * v.
    """
    limit_spec = ProblemSpec(
        n_components=field.n_components,
        p=p,
        lambdas=(0.0,) * field.n_components,
        q_profile=ConstantQ(q0),
    )
    return float(np.max(np.abs(_gradient_values(field.values, field.grid, limit_spec))))
