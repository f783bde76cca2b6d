"""Command-line entry point: config parsing, mode dispatch, artifact files.

Config files are a single strict JSON document (unknown keys are errors,
with a nearest-key suggestion).  Artifacts are deterministic: fixed float
formatting, no timestamps, and a leading metadata row carrying the config
hash, the run mode and the tool version.

Exit codes: 0 success, 1 config error, 2 non-convergence, 3 invariant
violation detected at runtime, 4 counterexample found in liouville mode.
"""

from __future__ import annotations

import argparse
import dataclasses
import difflib
import hashlib
import json
import sys
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import __version__
from .continuation import (
    ContinuationTrace,
    SweepFailedError,
    TailUndeterminedError,
    check_bounded_peak,
    check_monotone_level,
    extract_limit,
    grid_for_radius,
    sweep,
)
from .liouville import (
    SolitonParams,
    classify_scan,
    residual_of_limit_candidate,
    soliton_field,
)
from .model import (
    ConstantQ,
    Field,
    GaussianQ,
    Grid,
    ProblemSpec,
    QProfile,
    RationalQ,
    TabulatedQ,
    eval_q,
    gaussian_init,
    make_grid,
    validate_problem,
)
from .solver import (
    AllTrivialComponentsError,
    SolveOptions,
    SolveResult,
    drop_trivial_components,
    minimize_on_nehari,
)
from .variational import blowup_rescale, el_residual_norm

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NO_CONVERGENCE = 2
EXIT_INVARIANT = 3
EXIT_COUNTEREXAMPLE = 4

MODES = ("validate", "solve", "sweep", "blowup", "liouville", "oracle")


class ConfigError(ValueError):
    """Configuration diagnostic carrying the offending key path."""


@dataclass(frozen=True)
class LiouvilleConfig:
    q0: float
    p: float
    s_min: float
    s_max: float
    s_count: int
    t_max: float
    dt: float


@dataclass(frozen=True)
class RunConfig:
    mode: str
    output_dir: str
    seed: int
    problem: ProblemSpec | None
    radius: float | None
    radius_list: tuple[float, ...] | None
    h_target: float | None
    m: int | None
    solver: SolveOptions
    liouville: LiouvilleConfig | None
    config_hash: str
    raw: dict = dc_field(repr=False, default_factory=dict)


def _reject_unknown(mapping: dict, allowed, path: str):
    for key in mapping:
        if key not in allowed:
            suggestion = difflib.get_close_matches(key, allowed, n=1)
            hint = f" (did you mean {suggestion[0]!r}?)" if suggestion else ""
            raise ConfigError(f"{path}{key}: unknown key{hint}")


def _require(mapping: dict, key: str, path: str):
    if key not in mapping:
        raise ConfigError(f"{path}{key}: required key is missing")
    return mapping[key]


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _parse_q(qdict, path: str) -> QProfile:
    if not isinstance(qdict, dict):
        raise ConfigError(f"{path}: expected an object with kind/params")
    _reject_unknown(qdict, ("kind", "params"), path + ".")
    kind = _require(qdict, "kind", path + ".")
    params = qdict.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError(f"{path}.params: expected an object")
    ppath = path + ".params."
    if kind == "constant":
        _reject_unknown(params, ("c",), ppath)
        return ConstantQ(c=_number(params.get("c", 1.0), ppath + "c"))
    if kind == "gaussian":
        _reject_unknown(params, ("amplitude", "width"), ppath)
        return GaussianQ(amplitude=_number(params.get("amplitude", 1.0), ppath + "amplitude"),
                         width=_number(params.get("width", 1.0), ppath + "width"))
    if kind == "rational":
        _reject_unknown(params, ("amplitude", "scale"), ppath)
        return RationalQ(amplitude=_number(params.get("amplitude", 1.0), ppath + "amplitude"),
                         scale=_number(params.get("scale", 1.0), ppath + "scale"))
    if kind == "tabulated":
        _reject_unknown(params, ("radius", "values"), ppath)
        radius = _number(_require(params, "radius", ppath), ppath + "radius")
        values = _require(params, "values", ppath)
        if not isinstance(values, list) or not values:
            raise ConfigError(f"{ppath}values: expected a non-empty list")
        return TabulatedQ(radius=radius, values=np.asarray(values, dtype=float))
    raise ConfigError(f"{path}.kind: unknown profile kind {kind!r}")


def _parse_problem(pdict, path: str = "problem") -> ProblemSpec:
    if not isinstance(pdict, dict):
        raise ConfigError(f"{path}: expected an object")
    _reject_unknown(pdict, ("n_components", "p", "lambdas", "q"), path + ".")
    n = _require(pdict, "n_components", path + ".")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ConfigError(f"{path}.n_components: expected a positive integer, got {n!r}")
    p = _number(_require(pdict, "p", path + "."), path + ".p")
    lambdas = _require(pdict, "lambdas", path + ".")
    if not isinstance(lambdas, list) or len(lambdas) != n:
        raise ConfigError(f"{path}.lambdas: expected a list of {n} positive numbers")
    lambdas = tuple(_number(l, f"{path}.lambdas[{i}]") for i, l in enumerate(lambdas))
    q = _parse_q(_require(pdict, "q", path + "."), path + ".q")
    spec = ProblemSpec(n_components=n, p=p, lambdas=lambdas, q_profile=q)
    violations = validate_problem(spec)
    if violations:
        raise ConfigError(f"{path}: hypothesis violated: " + "; ".join(violations))
    return spec


def _parse_solver(sdict, path: str = "solver") -> SolveOptions:
    if sdict is None:
        return SolveOptions()
    if not isinstance(sdict, dict):
        raise ConfigError(f"{path}: expected an object")
    allowed = ("max_iters", "tol_grad", "enforce_symmetry", "newton_refine",
               "trivial_threshold")
    _reject_unknown(sdict, allowed, path + ".")
    kwargs = {}
    if "max_iters" in sdict:
        v = sdict["max_iters"]
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise ConfigError(f"{path}.max_iters: expected a positive integer")
        kwargs["max_iters"] = v
    for key in ("tol_grad", "trivial_threshold"):
        if key in sdict:
            v = _number(sdict[key], f"{path}.{key}")
            if v <= 0:
                raise ConfigError(f"{path}.{key}: must be positive")
            kwargs[key] = v
    for key in ("enforce_symmetry", "newton_refine"):
        if key in sdict:
            if not isinstance(sdict[key], bool):
                raise ConfigError(f"{path}.{key}: expected true or false")
            kwargs[key] = sdict[key]
    return SolveOptions(**kwargs)


def _parse_grid(gdict, mode: str):
    if not isinstance(gdict, dict):
        raise ConfigError("grid: expected an object")
    _reject_unknown(gdict, ("R", "R_list", "h_target", "m"), "grid.")
    radius = radius_list = h_target = m = None
    if "R" in gdict and "R_list" in gdict:
        raise ConfigError("grid: give either R or R_list, not both")
    if "h_target" in gdict and "m" in gdict:
        raise ConfigError("grid: give either h_target or m, not both")
    if "R" in gdict:
        radius = _number(gdict["R"], "grid.R")
        if radius <= 0:
            raise ConfigError("grid.R: must be positive")
    if "R_list" in gdict:
        rl = gdict["R_list"]
        if not isinstance(rl, list) or len(rl) < 1:
            raise ConfigError("grid.R_list: expected a non-empty list")
        radius_list = tuple(_number(r, f"grid.R_list[{i}]") for i, r in enumerate(rl))
        if any(r <= 0 for r in radius_list):
            raise ConfigError("grid.R_list: radii must be positive")
        if any(b <= a for a, b in zip(radius_list, radius_list[1:])):
            raise ConfigError("grid.R_list: radii must be strictly increasing")
    if "h_target" in gdict:
        h_target = _number(gdict["h_target"], "grid.h_target")
        if h_target <= 0:
            raise ConfigError("grid.h_target: must be positive")
    if "m" in gdict:
        v = gdict["m"]
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError("grid.m: expected an integer")
        if v < 3 or v % 2 == 0:
            raise ConfigError("grid.m: must be an odd integer >= 3")
        m = v
    if mode == "sweep":
        if radius_list is None:
            raise ConfigError("grid.R_list: sweep mode needs a radius list")
        if h_target is None:
            raise ConfigError("grid.h_target: sweep mode needs a target spacing")
    elif mode in ("solve", "blowup", "oracle"):
        if radius is None:
            raise ConfigError(f"grid.R: {mode} mode needs a radius")
        if h_target is None and m is None:
            raise ConfigError("grid: give h_target or m")
    return radius, radius_list, h_target, m


def _parse_liouville(ldict, path: str = "liouville") -> LiouvilleConfig:
    if not isinstance(ldict, dict):
        raise ConfigError(f"{path}: expected an object")
    allowed = ("q0", "p", "s_min", "s_max", "s_count", "T_max", "dt")
    _reject_unknown(ldict, allowed, path + ".")
    q0 = _number(_require(ldict, "q0", path + "."), path + ".q0")
    p = _number(_require(ldict, "p", path + "."), path + ".p")
    s_min = _number(_require(ldict, "s_min", path + "."), path + ".s_min")
    s_max = _number(_require(ldict, "s_max", path + "."), path + ".s_max")
    s_count = _require(ldict, "s_count", path + ".")
    t_max = _number(_require(ldict, "T_max", path + "."), path + ".T_max")
    dt = _number(_require(ldict, "dt", path + "."), path + ".dt")
    if isinstance(s_count, bool) or not isinstance(s_count, int) or s_count < 1:
        raise ConfigError(f"{path}.s_count: expected a positive integer")
    if q0 <= 0:
        raise ConfigError(f"{path}.q0: must be positive (Q(0) > 0)")
    if p <= 1:
        raise ConfigError(f"{path}.p: p must exceed 1")
    if s_max < s_min:
        raise ConfigError(f"{path}.s_max: must be >= s_min")
    if t_max <= 0 or dt <= 0:
        raise ConfigError(f"{path}: T_max and dt must be positive")
    return LiouvilleConfig(q0=q0, p=p, s_min=s_min, s_max=s_max,
                           s_count=s_count, t_max=t_max, dt=dt)


def parse_config_dict(raw: dict, config_hash: str) -> RunConfig:
    """Validate a loaded config document; diagnostics carry the key path."""
    if not isinstance(raw, dict):
        raise ConfigError("config root: expected a JSON object")
    allowed = ("problem", "grid", "solver", "mode", "output_dir", "seed", "liouville")
    _reject_unknown(raw, allowed, "")
    mode = _require(raw, "mode", "")
    if mode not in MODES:
        raise ConfigError(f"mode: unknown mode {mode!r}; expected one of {', '.join(MODES)}")
    output_dir = raw.get("output_dir", "out")
    if not isinstance(output_dir, str):
        raise ConfigError("output_dir: expected a string path")
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("seed: expected an integer")

    problem = None
    if mode != "liouville":
        problem = _parse_problem(_require(raw, "problem", ""))
    elif "problem" in raw:
        problem = _parse_problem(raw["problem"])

    radius = radius_list = h_target = m = None
    if mode in ("solve", "sweep", "blowup", "oracle"):
        radius, radius_list, h_target, m = _parse_grid(_require(raw, "grid", ""), mode)
    elif "grid" in raw:
        radius, radius_list, h_target, m = _parse_grid(raw["grid"], mode)

    solver = _parse_solver(raw.get("solver"))

    liouville = None
    if mode == "liouville":
        liouville = _parse_liouville(_require(raw, "liouville", ""))
    elif "liouville" in raw:
        liouville = _parse_liouville(raw["liouville"])

    if mode == "oracle" and problem is not None and problem.n_components != 1:
        raise ConfigError("problem.n_components: oracle mode is scalar (n_components = 1)")

    return RunConfig(mode=mode, output_dir=output_dir, seed=seed, problem=problem,
                     radius=radius, radius_list=radius_list, h_target=h_target, m=m,
                     solver=solver, liouville=liouville, config_hash=config_hash,
                     raw=raw)


def parse_config(path) -> RunConfig:
    """Load and validate a JSON config file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    data = path.read_bytes()
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return parse_config_dict(raw, hashlib.sha256(data).hexdigest())


def hash_config_dict(raw: dict) -> str:
    """Canonical hash for configs built in memory."""
    return hashlib.sha256(json.dumps(raw, sort_keys=True).encode()).hexdigest()


# ---------------------------------------------------------------------------
# Artifact emitters
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


def _meta_line(meta: dict | None) -> str:
    if meta is None:
        return ""
    return ("# " + " ".join(f"{k}={meta[k]}" for k in ("config", "mode", "version")) + "\n")


def emit_profile_csv(field: Field, path, meta: dict | None = None):
    """t, u1, ..., uN rows at 17 significant digits."""
    n = field.n_components
    lines = [_meta_line(meta), "t," + ",".join(f"u{j + 1}" for j in range(n)) + "\n"]
    for i in range(field.grid.m):
        row = [_fmt(field.grid.nodes[i])] + [_fmt(field.values[j, i]) for j in range(n)]
        lines.append(",".join(row) + "\n")
    Path(path).write_text("".join(lines), newline="")


def emit_result_json(result: SolveResult, path, meta: dict | None = None):
    """Scalar solve summary; floats round-trip bit-exactly through json."""
    doc = {}
    if meta is not None:
        doc["meta"] = meta
    doc.update({
        "d_R": result.level,
        "M_R": result.peak,
        "peak_component": result.peak_component,
        "peak_location": result.peak_location,
        "A": result.breakdown.quadratic,
        "B": result.breakdown.nonlinear,
        "nehari_residual": result.nehari_residual,
        "el_residual_norm": result.el_residual_norm,
        "iterations": result.iterations,
        "converged": result.converged,
        "dropped_components": list(result.dropped_components),
    })
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", newline="")


def emit_trace_csv(trace: ContinuationTrace, path, meta: dict | None = None):
    lines = [_meta_line(meta),
             "R,d_R,M_R,el_residual_norm,profile_diff,converged\n"]
    for e in trace.entries:
        lines.append(",".join([
            _fmt(e.radius), _fmt(e.level), _fmt(e.peak), _fmt(e.el_residual_norm),
            _fmt(e.profile_diff), "true" if e.converged else "false",
        ]) + "\n")
    Path(path).write_text("".join(lines), newline="")


def emit_liouville_csv(rows, verdict: str, path, meta: dict | None = None):
    lines = [_meta_line(meta),
             "s0,exit_forward,exit_backward,slope_max,classification\n"]
    for r in rows:
        lines.append(",".join([
            _fmt(r.s0), _fmt(r.exit_time_forward), _fmt(r.exit_time_backward),
            _fmt(r.slope_max), r.classification,
        ]) + "\n")
    lines.append(f"verdict,,,,{verdict}\n")
    Path(path).write_text("".join(lines), newline="")


def _write_json(doc: dict, path, meta: dict | None):
    out = {}
    if meta is not None:
        out["meta"] = meta
    out.update(doc)
    Path(path).write_text(json.dumps(out, indent=2) + "\n", newline="")


# ---------------------------------------------------------------------------
# Run modes
# ---------------------------------------------------------------------------

def _grid_for(config: RunConfig) -> Grid:
    if config.m is not None:
        return make_grid(config.radius, config.m)
    return grid_for_radius(config.radius, config.h_target)


def _check_result_invariants(result: SolveResult) -> list[str]:
    problems = []
    if result.converged:
        if not result.level > 0.0:
            problems.append(f"level {result.level!r} is not positive")
        if np.min(result.field.values) < 0.0:
            problems.append("converged field has negative samples")
        if result.peak != float(np.max(result.field.values)):
            problems.append("peak does not attain the field maximum")
    return problems


def _solve_once(config: RunConfig, emit_dir: Path, meta: dict, quiet: bool):
    spec = config.problem
    grid = _grid_for(config)
    init = gaussian_init(spec, grid)
    result = minimize_on_nehari(spec, grid, init, config.solver)
    result = drop_trivial_components(result, config.solver, spec)
    emit_result_json(result, emit_dir / "result.json", meta)
    emit_profile_csv(result.field, emit_dir / "profile.csv", meta)
    if not quiet:
        print(f"solve R={grid.radius:g} m={grid.m}: "
              f"d_R={result.level:.6g} M_R={result.peak:.6g} "
              f"converged={result.converged} iters={result.iterations}")
    return result


def run(config: RunConfig, quiet: bool = False, plot: bool = False) -> int:
    """Execute one configured mode, writing artifacts into output_dir."""
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = {"config": config.config_hash, "mode": config.mode, "version": __version__}

    if config.mode == "validate":
        violations = validate_problem(config.problem)
        _write_json({"violations": violations, "valid": not violations},
                    out / "validate.json", meta)
        if not quiet:
            if violations:
                print("hypothesis violations:")
                for v in violations:
                    print(f"  - {v}")
            else:
                print("all hypotheses hold")
        return EXIT_OK

    if config.mode == "solve":
        result = _solve_once(config, out, meta, quiet)
        if plot:
            from . import plots
            plots.plot_profile(result.field, out / "profile.png")
        problems = _check_result_invariants(result)
        if problems:
            if not quiet:
                print("invariant violation: " + "; ".join(problems))
            return EXIT_INVARIANT
        return EXIT_OK if result.converged else EXIT_NO_CONVERGENCE

    if config.mode == "sweep":
        try:
            trace = sweep(config.problem, config.radius_list, config.h_target,
                          config.solver)
        except SweepFailedError as exc:
            if not quiet:
                print(f"sweep failed: {exc}")
            return EXIT_NO_CONVERGENCE
        emit_trace_csv(trace, out / "trace.csv", meta)
        final = trace.entries[-1]
        emit_profile_csv(final.result.field, out / "profile.csv", meta)
        summary: dict = {"entries": len(trace.entries),
                         "all_converged": all(e.converged for e in trace.entries)}
        converged_count = sum(e.converged for e in trace.entries)
        monotone = None
        if converged_count >= 2:
            chk = check_monotone_level(trace)
            monotone = chk.passed
            summary["level_monotone"] = chk.passed
            summary["level_detail"] = chk.detail
            summary["peak_verdict"] = check_bounded_peak(
                trace, window=min(3, converged_count - 1))
        try:
            _, tail_rate = extract_limit(trace)
            summary["tail_rate"] = tail_rate
        except (TailUndeterminedError, ValueError) as exc:
            summary["tail_rate"] = None
            summary["tail_detail"] = str(exc)
        _write_json(summary, out / "sweep.json", meta)
        if plot:
            from . import plots
            plots.plot_trace(trace, out / "trace.png")
            plots.plot_profile(final.result.field, out / "profile.png")
        if not quiet:
            print(f"sweep of {len(trace.entries)} radii: "
                  + " ".join(f"d_R({e.radius:g})={e.level:.6g}" for e in trace.entries))
        for e in trace.entries:
            if e.converged and not e.level > 0.0:
                return EXIT_INVARIANT
        if monotone is False:
            return EXIT_INVARIANT
        if not all(e.converged for e in trace.entries):
            return EXIT_NO_CONVERGENCE
        return EXIT_OK

    if config.mode == "blowup":
        result = _solve_once(config, out, meta, quiet)
        if not result.converged:
            return EXIT_NO_CONVERGENCE
        rescaled = blowup_rescale(result.field, result.peak, config.problem)
        q0 = float(eval_q(config.problem.q_profile, 0.0))
        limit_res = residual_of_limit_candidate(rescaled.field, q0, config.problem.p)
        emit_profile_csv(rescaled.field, out / "rescaled_profile.csv", meta)
        _write_json({
            "M_R": result.peak,
            "beta": rescaled.beta,
            "rescaled_radius": rescaled.field.grid.radius,
            "leftover_lambdas": list(rescaled.leftover_lambdas),
            "limit_equation_residual": limit_res,
        }, out / "blowup.json", meta)
        if plot:
            from . import plots
            plots.plot_blowup(result.field, rescaled.field, out / "blowup.png")
        if not quiet:
            print(f"blow-up rescale at M={result.peak:.6g}: "
                  f"limit-equation residual {limit_res:.3e}")
        return EXIT_OK

    if config.mode == "liouville":
        lconf = config.liouville
        s_grid = np.linspace(lconf.s_min, lconf.s_max, lconf.s_count)
        rows, verdict = classify_scan(lconf.q0, lconf.p, s_grid, lconf.t_max, lconf.dt)
        emit_liouville_csv(rows, verdict, out / "liouville.csv", meta)
        if plot:
            from . import plots
            plots.plot_liouville(rows, out / "liouville.png")
        if not quiet:
            print(f"scan of {len(rows)} slopes: {verdict}")
        return EXIT_OK if verdict == "nonexistence-consistent" else EXIT_COUNTEREXAMPLE

    if config.mode == "oracle":
        spec = config.problem
        grid = _grid_for(config)
        params = SolitonParams(lam=spec.lambdas[0], p=spec.p,
                               q0=float(eval_q(spec.q_profile, 0.0)))
        field = soliton_field(params, grid)
        res = el_residual_norm(field, spec)
        emit_profile_csv(field, out / "profile.csv", meta)
        _write_json({
            "amplitude": params.amplitude,
            "decay_rate": params.rate,
            "el_residual_norm": res,
        }, out / "oracle.json", meta)
        if plot:
            from . import plots
            plots.plot_profile(field, out / "profile.png")
        if not quiet:
            print(f"soliton oracle: amplitude={params.amplitude:.6g} "
                  f"rate={params.rate:.6g} residual={res:.3e}")
        return EXIT_OK

    raise ConfigError(f"mode: unknown mode {config.mode!r}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nehari1d",
        description="Bound states of 1D coupled NLS systems by Nehari-manifold minimization",
    )
    parser.add_argument("--config", required=True, help="path to a JSON run configuration")
    parser.add_argument("--output", default=None, help="output directory (overrides config)")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    parser.add_argument("--plot", action="store_true",
                        help="also render figures next to the data files")
    args = parser.parse_args(argv)
    try:
        config = parse_config(args.config)
        if args.output is not None:
            config = dataclasses.replace(config, output_dir=args.output)
        code = run(config, quiet=args.quiet, plot=args.plot)
    except (ConfigError, AllTrivialComponentsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG if isinstance(exc, ConfigError) else EXIT_INVARIANT
    return code


if __name__ == "__main__":
    sys.exit(main())
