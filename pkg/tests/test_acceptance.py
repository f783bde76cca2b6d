"""Acceptance gate: every criterion at its stated tolerance.

Each test prints one [PASS]/[FAIL] line (visible with pytest -s); tolerances
are pinned here, not recalibrated elsewhere.  Quantitative targets come from
closed-form solutions: the sech-power soliton for the solver and the
conserved-energy quadrature for the shooter.
"""

import json
import time

import numpy as np
from scipy.integrate import quad

from nehari1d import (
    ConstantQ,
    ProblemSpec,
    SolitonParams,
    blowup_rescale,
    check_bounded_peak,
    check_monotone_level,
    classify_scan,
    el_residual_norm,
    energy_breakdown,
    energy_gradient,
    extract_limit,
    field_from_samples,
    gaussian_init,
    make_grid,
    minimize_on_nehari,
    nehari_scale,
    project_to_nehari,
    residual_of_limit_candidate,
    restricted_energy,
    shoot,
    soliton_field,
    sweep,
)
from nehari1d.cli import main
from nehari1d.variational import inner_product, scale_field

SPEC1 = ProblemSpec(1, 3.0, (1.0,), ConstantQ(1.0))
PARAMS1 = SolitonParams(lam=1.0, q0=1.0, p=3.0)


def _report(label, ok, detail=""):
    print(f"[{'PASS' if ok else 'FAIL'}] {label}" + (f" ({detail})" if detail else ""))
    assert ok, f"{label}: {detail}"


def _smooth_field(grid, n_components, rng):
    vals = np.zeros((n_components, grid.m))
    for j in range(n_components):
        for _ in range(3):
            c = rng.uniform(-0.5 * grid.radius, 0.5 * grid.radius)
            w = rng.uniform(0.5, 2.0)
            vals[j] += rng.uniform(0.2, 1.5) * np.exp(-((grid.nodes - c) ** 2) / (2 * w * w))
    vals[:, 0] = 0.0
    vals[:, -1] = 0.0
    return field_from_samples(grid, vals, clamp_ends=False)


def test_criterion_1_soliton_benchmark():
    # N=1, p=3, lambda=1, Q=1, R=20, h=0.02: M_R = sqrt(2) +- 1e-3,
    # d_R = 4/3 +- 2e-3, EL residual < 5e-3, under 30 s
    t0 = time.time()
    grid = make_grid(20.0, 2001)
    result = minimize_on_nehari(SPEC1, grid, gaussian_init(SPEC1, grid))
    elapsed = time.time() - t0
    ok = (result.converged
          and abs(result.peak - np.sqrt(2.0)) < 1e-3
          and abs(result.level - 4.0 / 3.0) < 2e-3
          and result.el_residual_norm < 5e-3
          and result.peak_location == 0.0
          and elapsed < 30.0)
    _report("criterion 1: soliton benchmark", ok,
            f"M_R={result.peak:.6f} d_R={result.level:.6f} "
            f"el={result.el_residual_norm:.2e} t={elapsed:.2f}s")


def test_criterion_2_coupled_benchmark():
    # N=2, lambda=(1,1): both components sech up to the directional
    # degeneracy selected by the symmetric init; M_R = 1 +- 1e-3
    spec = ProblemSpec(2, 3.0, (1.0, 1.0), ConstantQ(1.0))
    grid = make_grid(20.0, 2001)
    result = minimize_on_nehari(spec, grid, gaussian_init(spec, grid))
    sech = 1.0 / np.cosh(grid.nodes)
    sech[0] = sech[-1] = 0.0
    sup_err = max(float(np.max(np.abs(result.field.values[j] - sech))) for j in range(2))
    ok = result.converged and sup_err < 1e-3 and abs(result.peak - 1.0) < 1e-3
    _report("criterion 2: coupled benchmark", ok,
            f"M_R={result.peak:.6f} sup_err={sup_err:.2e}")


def test_criterion_3_nehari_machinery():
    # 100 random fields across p in {1.5, 2, 3, 5}: projection idempotence
    # within 1e-10, homogeneity within 1e-12 relative, restricted-energy
    # identity within 1e-8 relative
    rng = np.random.default_rng(101)
    grid = make_grid(5.0, 201)
    worst_idem = worst_homog = worst_restr = 0.0
    for p in (1.5, 2.0, 3.0, 5.0):
        spec = ProblemSpec(1, p, (1.0,), ConstantQ(1.0))
        for _ in range(25):
            u = _smooth_field(grid, 1, rng)
            proj = project_to_nehari(u, spec)
            worst_idem = max(worst_idem, abs(nehari_scale(proj, spec) - 1.0))
            bd = energy_breakdown(u, spec)
            for c in (0.5, 2.0, 3.0):
                bdc = energy_breakdown(scale_field(u, c), spec)
                worst_homog = max(
                    worst_homog,
                    abs(bdc.quadratic - c**2 * bd.quadratic) / (c**2 * bd.quadratic),
                    abs(bdc.nonlinear - c ** (p + 1) * bd.nonlinear)
                    / (c ** (p + 1) * bd.nonlinear),
                )
            bdp = energy_breakdown(proj, spec)
            worst_restr = max(worst_restr,
                              abs(restricted_energy(proj, spec) - bdp.energy)
                              / max(bdp.quadratic, 1.0))
    ok = worst_idem < 1e-10 and worst_homog < 1e-12 and worst_restr < 1e-8
    _report("criterion 3: Nehari machinery", ok,
            f"idem={worst_idem:.2e} homog={worst_homog:.2e} restr={worst_restr:.2e}")


def test_criterion_4_gradient_check():
    # finite-difference directional derivatives vs discrete gradient,
    # 20 random directions, relative error < 1e-4
    rng = np.random.default_rng(202)
    grid = make_grid(5.0, 201)
    spec = ProblemSpec(2, 3.0, (1.0, 2.0), ConstantQ(1.0))
    u = _smooth_field(grid, 2, rng)
    grad = energy_gradient(u, spec)
    eps = 1e-5
    worst = 0.0
    for _ in range(20):
        v = _smooth_field(grid, 2, rng)
        ep = energy_breakdown(field_from_samples(grid, u.values + eps * v.values,
                                                 clamp_ends=False), spec).energy
        em = energy_breakdown(field_from_samples(grid, u.values - eps * v.values,
                                                 clamp_ends=False), spec).energy
        fd = (ep - em) / (2 * eps)
        ip = inner_product(grad.values, v.values, grid)
        worst = max(worst, abs(fd - ip) / max(abs(ip), 1e-12))
    _report("criterion 4: gradient check", worst < 1e-4, f"worst rel err={worst:.2e}")


def test_criterion_5_stencil_order():
    # EL residual of the exact soliton drops by 4 +- 0.5 per h -> h/2
    norms = []
    for m in (2501, 5001, 10001):
        grid = make_grid(25.0, m)
        norms.append(el_residual_norm(soliton_field(PARAMS1, grid), SPEC1))
    ratios = [norms[i] / norms[i + 1] for i in range(2)]
    ok = all(3.5 <= r <= 4.5 for r in ratios)
    _report("criterion 5: stencil order", ok,
            "ratios=" + ", ".join(f"{r:.3f}" for r in ratios))


def test_criterion_6_continuation_claims():
    # sweep R in {5,10,20,40} at h=0.02 for lambda in {1,4}: level positive
    # and non-increasing (1e-6 relative), peak bounded-converging, tail rate
    # -sqrt(lambda) within 5%; under 5 minutes
    t0 = time.time()
    details = []
    ok = True
    for lam in (1.0, 4.0):
        spec = ProblemSpec(1, 3.0, (lam,), ConstantQ(1.0))
        trace = sweep(spec, (5.0, 10.0, 20.0, 40.0), 0.02)
        mono = check_monotone_level(trace)
        verdict = check_bounded_peak(trace)
        _, rate = extract_limit(trace)
        target = -np.sqrt(lam)
        ok = (ok and mono.passed and verdict == "bounded-converging"
              and abs(rate - target) < 0.05 * abs(target)
              and all(e.level > 0 for e in trace.entries)
              and all(e.converged for e in trace.entries))
        details.append(f"lam={lam:g}: mono={mono.passed} {verdict} rate={rate:.4f}")
    elapsed = time.time() - t0
    ok = ok and elapsed < 300.0
    _report("criterion 6: continuation claims", ok,
            "; ".join(details) + f"; t={elapsed:.1f}s")


def test_criterion_7_blowup_consistency():
    # rescaled exact solitons: limit-equation residual tracks the leftover
    # coefficient lambda * M^(1-p) within 10% at M in {2, 8, 32}
    grid = make_grid(20.0, 2001)
    u = soliton_field(PARAMS1, grid)
    worst = 0.0
    for peak in (2.0, 8.0, 32.0):
        rs = blowup_rescale(u, peak, SPEC1)
        res = residual_of_limit_candidate(rs.field, 1.0, 3.0)
        predicted = peak ** (1.0 - 3.0) * float(np.max(rs.field.values))
        worst = max(worst, abs(res - predicted) / predicted)
    _report("criterion 7: blow-up consistency", worst < 0.10,
            f"worst deviation={worst:.2%}")


def test_criterion_8_liouville_certification():
    # 41 slopes in [-2,2], p in {1.5,2,3,5}, q0 in {0.5,1,2}, T_max=50:
    # nonexistence-consistent with zero undetermined rows; exit time for
    # (p=3, q0=1, s0=0) within 1e-3 of the quadrature oracle; under 1 minute
    t0 = time.time()
    undetermined = 0
    all_consistent = True
    for p in (1.5, 2.0, 3.0, 5.0):
        for q0 in (0.5, 1.0, 2.0):
            rows, verdict = classify_scan(q0, p, np.linspace(-2.0, 2.0, 41), 50.0, 1e-3)
            all_consistent &= verdict == "nonexistence-consistent"
            undetermined += sum(r.classification == "undetermined" for r in rows)
    oracle, _ = quad(lambda f: 1.0 / np.sqrt(2.0 * (1.0 - f**4) / 4.0), 0.0, 1.0,
                     epsabs=1e-13, epsrel=1e-13)
    r = shoot(q0=1.0, p=3.0, f0=1.0, s0=0.0, t_max=50.0, dt=1e-3)
    exit_err = abs(r.exit_time_forward - oracle)
    elapsed = time.time() - t0
    ok = (all_consistent and undetermined == 0 and exit_err < 1e-3
          and abs(oracle - 1.854074677301372) < 1e-12 and elapsed < 60.0)
    _report("criterion 8: liouville certification", ok,
            f"undetermined={undetermined} exit_err={exit_err:.2e} t={elapsed:.1f}s")


def test_criterion_9_shooter_quality():
    # Hamiltonian drift < 1e-8 relative at dt=1e-3 over [0, exit];
    # time-reversal exit symmetry within 1e-9
    r = shoot(q0=1.0, p=3.0, f0=1.0, s0=0.0, t_max=50.0, dt=1e-3)
    mask = r.forward.f > 0.0
    h = 0.5 * r.forward.slope[mask] ** 2 + r.forward.f[mask] ** 4 / 4.0
    drift = float(np.max(np.abs(h - h[0])) / h[0])
    a = shoot(q0=1.0, p=3.0, f0=1.0, s0=0.9, t_max=50.0, dt=1e-3)
    b = shoot(q0=1.0, p=3.0, f0=1.0, s0=-0.9, t_max=50.0, dt=1e-3)
    reversal = max(abs(a.exit_time_forward + b.exit_time_backward),
                   abs(a.exit_time_backward + b.exit_time_forward))
    ok = drift < 1e-8 and reversal < 1e-9
    _report("criterion 9: shooter quality", ok,
            f"drift={drift:.2e} reversal={reversal:.2e}")


def test_criterion_10_cli_determinism(tmp_path):
    # every mode, fixed config and seed, two runs: byte-identical artifacts
    problem = {"n_components": 1, "p": 3.0, "lambdas": [1.0],
               "q": {"kind": "constant", "params": {"c": 1.0}}}
    configs = {
        "validate": {"problem": problem, "mode": "validate"},
        "solve": {"problem": problem, "grid": {"R": 6.0, "h_target": 0.1},
                  "mode": "solve"},
        "sweep": {"problem": problem,
                  "grid": {"R_list": [3.0, 5.0], "h_target": 0.1}, "mode": "sweep"},
        "blowup": {"problem": problem, "grid": {"R": 6.0, "h_target": 0.1},
                   "mode": "blowup"},
        "oracle": {"problem": problem, "grid": {"R": 6.0, "m": 121},
                   "mode": "oracle"},
        "liouville": {"mode": "liouville",
                      "liouville": {"q0": 1.0, "p": 3.0, "s_min": -1.0, "s_max": 1.0,
                                    "s_count": 5, "T_max": 10.0, "dt": 0.01}},
    }
    mismatches = []
    for mode, cfg in configs.items():
        cfg = dict(cfg)
        cfg["seed"] = 0
        cfg["output_dir"] = "unused"
        path = tmp_path / f"{mode}.json"
        path.write_text(json.dumps(cfg))
        outs = []
        for tag in ("a", "b"):
            out = tmp_path / mode / tag
            assert main(["--config", str(path), "--output", str(out), "--quiet"]) == 0
            outs.append(out)
        names = sorted(p.name for p in outs[0].iterdir())
        if names != sorted(p.name for p in outs[1].iterdir()) or not names:
            mismatches.append(f"{mode}: file sets differ")
            continue
        for name in names:
            if (outs[0] / name).read_bytes() != (outs[1] / name).read_bytes():
                mismatches.append(f"{mode}/{name}")
    _report("criterion 10: CLI determinism", not mismatches,
            "; ".join(mismatches) if mismatches else "6 modes byte-identical")
