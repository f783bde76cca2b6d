"""Figure rendering for the report path: profiles, sweep traces, scan tables.

Figures are written next to the delimited data files when the CLI is run
with --plot.  Rendering is deterministic: Agg backend, fixed sizes, pinned
PNG metadata, no timestamps.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_PNG_META = {"Software": "nehari1d"}
_DPI = 150


def _save(fig, path):
    fig.savefig(path, dpi=_DPI, metadata=_PNG_META)
    plt.close(fig)


def plot_profile(field, path):
    """Component profiles over the interval."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for j in range(field.n_components):
        ax.plot(field.grid.nodes, field.values[j], label=f"u{j + 1}")
    ax.set_xlabel("t")
    ax.set_ylabel("u(t)")
    ax.legend(loc="upper right")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def plot_trace(trace, path):
    """Level and peak against the truncation radius."""
    radii = [e.radius for e in trace.entries]
    levels = [e.level for e in trace.entries]
    peaks = [e.peak for e in trace.entries]
    diffs = [e.profile_diff for e in trace.entries]
    fig, axes = plt.subplots(1, 3, figsize=(12.0, 3.6))
    axes[0].plot(radii, levels, "o-")
    axes[0].set_xlabel("R")
    axes[0].set_ylabel("level")
    axes[1].plot(radii, peaks, "s-", color="tab:orange")
    axes[1].set_xlabel("R")
    axes[1].set_ylabel("peak")
    xs = [r for r, d in zip(radii, diffs) if d is not None and d > 0]
    ys = [d for d in diffs if d is not None and d > 0]
    if ys:
        axes[2].semilogy(xs, ys, "^-", color="tab:green")
    axes[2].set_xlabel("R")
    axes[2].set_ylabel("profile change")
    for ax in axes:
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def plot_liouville(rows, path):
    """Exit times of the positivity window against the launch slope."""
    s0 = np.array([r.s0 for r in rows])
    fwd = np.array([np.nan if r.exit_time_forward is None else r.exit_time_forward
                    for r in rows])
    bwd = np.array([np.nan if r.exit_time_backward is None else r.exit_time_backward
                    for r in rows])
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(s0, fwd, "o-", label="forward exit")
    ax.plot(s0, bwd, "s-", label="backward exit")
    ax.axhline(0.0, color="k", lw=0.5)
    ax.set_xlabel("initial slope s0")
    ax.set_ylabel("exit time")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def plot_blowup(original, rescaled, path):
    """Original minimizer next to its peak-normalized rescaling."""
    fig, axes = plt.subplots(1, 2, figsize=(10.0, 4.0))
    for j in range(original.n_components):
        axes[0].plot(original.grid.nodes, original.values[j], label=f"u{j + 1}")
        axes[1].plot(rescaled.grid.nodes, rescaled.values[j], label=f"v{j + 1}")
    axes[0].set_title("minimizer")
    axes[1].set_title("peak-rescaled")
    for ax in axes:
        ax.set_xlabel("t")
        ax.grid(True, alpha=0.3)
        ax.legend(loc="upper right")
    fig.tight_layout()
    _save(fig, path)
