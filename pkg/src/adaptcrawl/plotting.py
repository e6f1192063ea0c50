"""Figures for the trace and scaling reports.

Uses the non-interactive Agg backend; figures go straight to PNG files.
"""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .report import ScaleReport, TracePoint  # noqa: E402

STYLE = {
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
    "legend.fontsize": "small",
    "figure.dpi": 100,
    "savefig.bbox": "tight",
    # keeps PNG bytes stable between identical runs
    "svg.hashsalt": "adaptcrawl",
}


def _by_iwm(points):
    series = defaultdict(lambda: ([], []))
    for p in points:
        xs, ys = series[p.iwm_id]
        xs.append(p.t_sec)
        ys.append(p.value)
    return series


def plot_traces(traces: dict[str, list[TracePoint]], path: str | Path) -> Path:
    panels = (
        ("error", "std. deviation (pages/s)", "0.25"),
        ("speed", "crawl speed (pages/s)", "0.35"),
        ("threads", "robots", "0.45"),
    )
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(3, 1, figsize=(7, 7), sharex=True)
        for ax, (key, label, color) in zip(axes, panels):
            for iwm, (xs, ys) in sorted(_by_iwm(traces[key]).items()):
                draw = ax.step if key == "threads" else ax.plot
                kwargs = {"where": "post"} if key == "threads" else {}
                draw(xs, ys, color=color, lw=1.0, label=iwm, **kwargs)
            ax.set_ylabel(label)
        axes[-1].set_xlabel("crawling time (s)")
        if len({p.iwm_id for p in traces["speed"]}) > 1:
            axes[0].legend()
        fig.savefig(path, metadata={"Software": None})
        plt.close(fig)
    return Path(path)


def plot_scaling(report: ScaleReport, path: str | Path) -> Path:
    pts = sorted(report.points, key=lambda p: (p.iwm_id, p.t_sec))
    ts = [p.t_sec for p in pts]
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(3, 1, figsize=(7, 7), sharex=True)
        axes[0].plot(ts, [p.observed_bw for p in pts], color="0.3", lw=1.0)
        axes[0].set_ylabel("bandwidth (kB/s)")
        axes[1].plot(ts, [p.c_si for p in pts], color="0.35", lw=0.8)
        axes[1].set_ylabel("crawl speed (pages/s)")
        axes[2].plot(ts, [p.scaled for p in pts], color="0.2", lw=0.8)
        axes[2].set_ylabel(f"scaled @ {report.target_bw:g} kB/s")
        axes[2].set_xlabel("crawling time (s)")
        fig.savefig(path, metadata={"Software": None})
        plt.close(fig)
    return Path(path)
