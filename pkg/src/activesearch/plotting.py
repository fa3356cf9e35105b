"""Figure rendering for reports. Uses the Agg backend so it works headless;
every function writes a file and returns its path."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import ParameterError

__all__ = ["save_recall_figure", "save_bench_figure"]

_COLORS = {"las": "tab:blue", "wnas": "tab:orange", "asg": "tab:green"}


def save_recall_figure(curves, path, title: str | None = None) -> Path:
    """Mean recall per engine vs iteration, with the ideal and random
    reference lines; faint per-seed traces behind the means."""
    if not curves:
        raise ParameterError("no curves to plot")
    path = Path(path)
    by_engine: dict[str, list] = {}
    for c in curves:
        by_engine.setdefault(c.engine, []).append(c)

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    T = min(c.T for c in curves)
    t_axis = np.arange(1, T + 1)
    ref = curves[0]
    ax.plot(t_axis, ref.ideal[:T], color="0.3", ls="--", lw=1.2, label="ideal")
    ax.plot(t_axis, ref.random_expect[:T], color="0.6", ls=":", lw=1.2, label="random")
    for engine, group in sorted(by_engine.items()):
        color = _COLORS.get(engine, "tab:red")
        for c in group:
            ax.plot(t_axis, c.found[:T], color=color, alpha=0.15, lw=0.8)
        mean = np.mean([c.found[:T] for c in group], axis=0)
        ax.plot(t_axis, mean, color=color, lw=2.0,
                label=f"{engine} (mean of {len(group)})")
    ax.set_xlabel("iteration")
    ax.set_ylabel("positives found")
    ax.set_title(title or "recall vs iteration")
    ax.legend(loc="upper left", frameon=False)
    ax.grid(alpha=0.25)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def save_bench_figure(rows, path, title: str | None = None) -> Path:
    """Median per-iteration seconds vs n on log-log axes."""
    if not rows:
        raise ParameterError("no benchmark rows to plot")
    path = Path(path)
    ns = [row.n for row in rows]
    ts = [row.median_iter_seconds for row in rows]
    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    ax.loglog(ns, ts, "o-", color="tab:blue")
    ax.set_xlabel("points (n)")
    ax.set_ylabel("median seconds per iteration")
    ax.set_title(title or f"per-iteration scaling (r={rows[0].r})")
    ax.grid(alpha=0.25, which="both")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
