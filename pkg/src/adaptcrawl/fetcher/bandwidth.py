"""Time-varying bandwidth profiles and bandwidth scaling of crawl speed."""

from __future__ import annotations

import bisect
import csv
import hashlib
import math
import struct
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

# 250 MB/s in decimal kilobytes per second.
TARGET_BW_KBPS = 250_000.0


@dataclass(frozen=True)
class BandwidthProfile:
    """Piecewise-linear bandwidth anchors in kB/s with optional seeded noise.

    Noise is constant over each ``noise_period`` second bucket and uniform in
    ``[-noise_amplitude, +noise_amplitude]`` relative to the anchor curve.
    """

    segments: tuple[tuple[float, float], ...]
    noise_amplitude: float = 0.0
    rng_seed: int = 0
    noise_period: float = 1.0
    _times: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        segs = tuple((float(t), float(b)) for t, b in self.segments)
        if not segs:
            raise ValueError("profile needs at least one segment")
        if segs[0][0] != 0.0:
            raise ValueError("first segment must start at t=0")
        for (t0, _), (t1, _) in zip(segs, segs[1:]):
            if not t1 > t0:
                raise ValueError("segment start times must strictly increase")
        if any(not b > 0 for _, b in segs):
            raise ValueError("bandwidths must be positive")
        if not 0.0 <= self.noise_amplitude < 1.0:
            raise ValueError("noise_amplitude must be in [0, 1)")
        if not self.noise_period > 0:
            raise ValueError("noise_period must be positive")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "_times", tuple(t for t, _ in segs))

    @property
    def span(self) -> tuple[float, float]:
        """Time range the anchors cover; a single anchor covers all t >= 0."""
        if len(self.segments) == 1:
            return (0.0, math.inf)
        return (self.segments[0][0], self.segments[-1][0])

    def base_at(self, t: float) -> float:
        segs = self.segments
        i = bisect.bisect_right(self._times, t) - 1
        if i < 0:
            return segs[0][1]
        if i >= len(segs) - 1:
            return segs[-1][1]
        (t0, b0), (t1, b1) = segs[i], segs[i + 1]
        return b0 + (b1 - b0) * (t - t0) / (t1 - t0)

    def noise_at(self, t: float) -> float:
        if self.noise_amplitude == 0.0:
            return 0.0
        return self.noise_amplitude * (2.0 * _unit(self.rng_seed, math.floor(t / self.noise_period)) - 1.0)

    def with_noise(self, amplitude: float, rng_seed: int, period: float = 1.0) -> "BandwidthProfile":
        return BandwidthProfile(self.segments, amplitude, rng_seed, period)


@lru_cache(maxsize=65536)
def _unit(seed: int, bucket: int) -> float:
    digest = hashlib.blake2b(f"{seed}:{bucket}".encode(), digest_size=8).digest()
    return struct.unpack("<Q", digest)[0] / 2.0**64


def bandwidth_at(profile: BandwidthProfile, t: float) -> float:
    if t < 0:
        raise ValueError("t must be non-negative")
    return profile.base_at(t) * (1.0 + profile.noise_at(t))


def scale_speed(observed: float, observed_bw: float, target_bw: float = TARGET_BW_KBPS) -> float:
    """Crawl speed mapped linearly onto a different bandwidth."""
    if not observed_bw > 0 or not target_bw > 0:
        raise ValueError("bandwidths must be positive")
    return observed * (target_bw / observed_bw)


def load_profile(path: str | Path, noise_amplitude: float = 0.0, rng_seed: int = 0) -> BandwidthProfile:
    """Read a ``t_sec,kb_per_sec`` CSV (header optional)."""
    rows: list[tuple[float, float]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if lineno == 1 and row[0].strip() == "t_sec":
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: expected 't_sec,kb_per_sec'")
            try:
                rows.append((float(row[0]), float(row[1])))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric value") from None
    try:
        return BandwidthProfile(tuple(rows), noise_amplitude, rng_seed)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


def write_profile(path: str | Path, profile: BandwidthProfile) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("t_sec,kb_per_sec\n")
        for t, b in profile.segments:
            fh.write(f"{t!r},{b!r}\n")
