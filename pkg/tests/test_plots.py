import numpy as np

from nehari1d import classify_scan
from nehari1d.plots import plot_blowup, plot_liouville, plot_profile, plot_trace

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def test_profile_figure_renders_and_is_deterministic(tmp_path, benchmark_result):
    paths = [tmp_path / "a.png", tmp_path / "b.png"]
    for p in paths:
        plot_profile(benchmark_result.field, p)
    data = [p.read_bytes() for p in paths]
    assert data[0][:8] == PNG_MAGIC
    assert len(data[0]) > 1000
    assert data[0] == data[1]


def test_trace_figure(tmp_path, sweep_lambda1):
    path = tmp_path / "trace.png"
    plot_trace(sweep_lambda1, path)
    assert path.read_bytes()[:8] == PNG_MAGIC


def test_liouville_figure(tmp_path):
    rows, _ = classify_scan(1.0, 3.0, np.linspace(-1.0, 1.0, 5), 10.0, 0.01)
    path = tmp_path / "scan.png"
    plot_liouville(rows, path)
    assert path.read_bytes()[:8] == PNG_MAGIC


def test_blowup_figure(tmp_path, benchmark_result, benchmark_spec):
    from nehari1d import blowup_rescale

    rescaled = blowup_rescale(benchmark_result.field, benchmark_result.peak,
                              benchmark_spec)
    path = tmp_path / "blowup.png"
    plot_blowup(benchmark_result.field, rescaled.field, path)
    assert path.read_bytes()[:8] == PNG_MAGIC


def test_cli_plot_flag_writes_figures(tmp_path):
    import json

    from nehari1d.cli import main

    cfg = {"problem": {"n_components": 1, "p": 3.0, "lambdas": [1.0],
                       "q": {"kind": "constant", "params": {"c": 1.0}}},
           "grid": {"R": 6.0, "h_target": 0.1},
           "mode": "solve", "output_dir": str(tmp_path / "out")}
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    assert main(["--config", str(path), "--quiet", "--plot"]) == 0
    assert (tmp_path / "out" / "profile.png").read_bytes()[:8] == PNG_MAGIC
    assert (tmp_path / "out" / "profile.csv").exists()
