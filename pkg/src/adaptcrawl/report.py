"""Trace and scaling reports built from a persisted crawl log.

Every report is written as CSV first; figures are rendered next to the CSV
files from the same rows.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

from .fetcher.bandwidth import TARGET_BW_KBPS, BandwidthProfile, bandwidth_at, scale_speed
from .scheduler import CrawlLogEntry
from .stats import std_deviation, std_deviation_two_pass

TRACE_FILES = {
    "error": ("error_trace.csv", "xi_cs"),
    "speed": ("speed_trace.csv", "c_si"),
    "threads": ("thread_trace.csv", "p_t"),
}


class RangeError(ValueError):
    """Log and bandwidth profile share no time range."""


@dataclass(frozen=True)
class TracePoint:
    t_sec: float
    iwm_id: str
    value: float
    n: int


def build_traces(entries: list[CrawlLogEntry], bucket_sec: float = 100.0) -> dict[str, list[TracePoint]]:
    """Bucket the log by time: mean deviation, mean speed, last robot count."""
    if not bucket_sec > 0:
        raise ValueError("bucket_sec must be positive")
    groups: dict[tuple[str, float], list[CrawlLogEntry]] = defaultdict(list)
    for e in entries:
        groups[(e.iwm_id, math.floor(e.t / bucket_sec) * bucket_sec)].append(e)
    traces: dict[str, list[TracePoint]] = {k: [] for k in TRACE_FILES}
    for (iwm, start), rows in sorted(groups.items()):
        n = len(rows)
        traces["error"].append(TracePoint(start, iwm, math.fsum(r.xi_cs for r in rows) / n, n))
        traces["speed"].append(TracePoint(start, iwm, math.fsum(r.c_si for r in rows) / n, n))
        traces["threads"].append(TracePoint(start, iwm, float(rows[-1].p_t), n))
    return traces


def write_traces(traces: dict[str, list[TracePoint]], out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for key, (fname, column) in TRACE_FILES.items():
        path = out / fname
        lines = [f"t_sec,iwm_id,{column},n\n"]
        for p in traces[key]:
            value = int(p.value) if key == "threads" else p.value
            lines.append(f"{p.t_sec!r},{p.iwm_id},{value!r},{p.n}\n")
        path.write_text("".join(lines), encoding="utf-8")
        paths.append(path)
    return paths


@dataclass(frozen=True)
class ScaledPoint:
    t_sec: float
    iwm_id: str
    c_si: float
    observed_bw: float
    scaled: float


@dataclass(frozen=True)
class ScaleReport:
    target_bw: float
    points: tuple[ScaledPoint, ...]
    skipped: int

    @property
    def values(self) -> list[float]:
        return [p.scaled for p in self.points]

    @property
    def min(self) -> float:
        return min(self.values)

    @property
    def max(self) -> float:
        return max(self.values)

    @property
    def mean(self) -> float:
        return math.fsum(self.values) / len(self.points)

    def summary(self) -> dict:
        return {
            "target_bw_kbps": self.target_bw,
            "count": len(self.points),
            "skipped_outside_profile": self.skipped,
            "min": self.min,
            "max": self.max,
            "mean": self.mean,
        }


def scale_log(entries: list[CrawlLogEntry], profile: BandwidthProfile, target_bw: float = TARGET_BW_KBPS) -> ScaleReport:
    """Scale every logged speed by ``target_bw / bandwidth_at(t)``.

    Only entries inside the profile's anchor span are used.
    """
    lo, hi = profile.span
    points, skipped = [], 0
    for e in entries:
        if not lo <= e.t <= hi:
            skipped += 1
            continue
        bw = bandwidth_at(profile, e.t)
        points.append(ScaledPoint(e.t, e.iwm_id, e.c_si, bw, scale_speed(e.c_si, bw, target_bw)))
    if not points:
        raise RangeError(f"no log entry falls inside the profile span [{lo}, {hi}]")
    return ScaleReport(target_bw, tuple(points), skipped)


def write_scale_report(report: ScaleReport, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "scaled_speed.csv"
    lines = ["t_sec,iwm_id,c_si,observed_bw,scaled\n"]
    lines += [f"{p.t_sec!r},{p.iwm_id},{p.c_si!r},{p.observed_bw!r},{p.scaled!r}\n" for p in report.points]
    csv_path.write_text("".join(lines), encoding="utf-8")
    json_path = out / "scale_summary.json"
    json_path.write_text(json.dumps(report.summary(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return [csv_path, json_path]


def replay_stats(entries: list[CrawlLogEntry]) -> tuple[float, float]:
    """Mean and standard deviation of the logged speeds, recomputed from scratch."""
    st = std_deviation_two_pass([e.c_si for e in entries])
    return st.rho_cs, st.xi_cs


def replay_stats_one_pass(entries: list[CrawlLogEntry]) -> tuple[float, float]:
    st = std_deviation([e.c_si for e in entries])
    return st.rho_cs, st.xi_cs
