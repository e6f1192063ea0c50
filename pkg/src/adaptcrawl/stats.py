"""Crawl-speed statistics: speed, mean, mean-square deviation, deviation delta and its sign."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence


class ZeroDurationError(ValueError):
    """Raised when a speed is sampled before the clock has advanced."""


class EmptySeriesError(ValueError):
    """Raised when statistics are requested over an empty series."""


@dataclass(frozen=True)
class SpeedSample:
    t: float
    visited: int
    c_si: float


@dataclass(frozen=True)
class SpeedStats:
    rho_cs: float
    xi2_cs: float
    xi_cs: float


def crawl_speed(visited: int, start_t: float, now_t: float) -> float:
    """Pages per second since ``start_t``."""
    if visited < 0:
        raise ValueError(f"visited must be non-negative, got {visited}")
    elapsed = now_t - start_t
    if not elapsed > 0:
        raise ZeroDurationError(f"zero or negative crawl duration ({start_t} -> {now_t})")
    return visited / elapsed


class SpeedSeries:
    """Ordered crawl-speed observations with running sums.

    With ``maxlen`` set the series keeps only the most recent observations;
    sums are refreshed with :func:`math.fsum` whenever an old sample drops out
    so that drift cannot accumulate.
    """

    def __init__(self, samples: Iterable[SpeedSample] = (), maxlen: int | None = None):
        if maxlen is not None and maxlen < 1:
            raise ValueError("maxlen must be positive")
        self.maxlen = maxlen
        self._samples: deque[SpeedSample] = deque()
        self._sum = 0.0
        self._sum_sq = 0.0
        self._lo = math.inf
        self._hi = -math.inf
        for s in samples:
            self.append(s)

    def __len__(self) -> int:
        return len(self._samples)

    def __iter__(self):
        return iter(self._samples)

    @property
    def M(self) -> int:
        return len(self._samples)

    @property
    def samples(self) -> list[SpeedSample]:
        return list(self._samples)

    @property
    def values(self) -> list[float]:
        return [s.c_si for s in self._samples]

    def append(self, sample: SpeedSample) -> None:
        if sample.c_si < 0 or not math.isfinite(sample.c_si):
            raise ValueError(f"crawl speed must be finite and non-negative, got {sample.c_si}")
        if self._samples:
            last = self._samples[-1]
            if sample.t <= last.t:
                raise ValueError(f"sample time must strictly increase ({last.t} -> {sample.t})")
            if sample.visited < last.visited:
                raise ValueError("visited count must be non-decreasing")
        self._samples.append(sample)
        if self.maxlen is not None and len(self._samples) > self.maxlen:
            self._samples.popleft()
            self._refresh()
        else:
            self._sum += sample.c_si
            self._sum_sq += sample.c_si * sample.c_si
            self._lo = min(self._lo, sample.c_si)
            self._hi = max(self._hi, sample.c_si)

    def push(self, c_si: float, t: float | None = None, visited: int | None = None) -> None:
        """Append a bare speed value, synthesising a timestamp if none is given."""
        if t is None:
            t = self._samples[-1].t + 1.0 if self._samples else 0.0
        if visited is None:
            visited = self._samples[-1].visited if self._samples else 0
        self.append(SpeedSample(t=t, visited=visited, c_si=c_si))

    def clear(self) -> None:
        self._samples.clear()
        self._refresh()

    def _refresh(self) -> None:
        vals = [s.c_si for s in self._samples]
        self._sum = math.fsum(vals)
        self._sum_sq = math.fsum(v * v for v in vals)
        self._lo = min(vals, default=math.inf)
        self._hi = max(vals, default=-math.inf)

    @property
    def total(self) -> float:
        return self._sum

    @property
    def total_sq(self) -> float:
        return self._sum_sq

    def is_constant(self) -> bool:
        return bool(self._samples) and self._lo == self._hi

    def stats(self) -> SpeedStats:
        return std_deviation(self)


def _as_values(series: SpeedSeries | Sequence[float]) -> list[float]:
    if isinstance(series, SpeedSeries):
        return series.values
    return [float(v) for v in series]


def mean_speed(series: SpeedSeries | Sequence[float]) -> float:
    if isinstance(series, SpeedSeries):
        if series.M == 0:
            raise EmptySeriesError("mean of an empty speed series")
        return series.total / series.M
    vals = _as_values(series)
    if not vals:
        raise EmptySeriesError("mean of an empty speed series")
    return math.fsum(vals) / len(vals)


def std_deviation(series: SpeedSeries | Sequence[float]) -> SpeedStats:
    """Population mean-square deviation from one pass of sums.

    ``xi2 = (M * sum(d^2) - sum(d)^2) / M^2`` with ``d = c - c[0]``.  The
    shift leaves the result unchanged but keeps the subtraction from
    cancelling when the speeds sit far from zero.  A constant series returns
    an exact zero.
    """
    vals = _as_values(series)
    m = len(vals)
    if m == 0:
        raise EmptySeriesError("standard deviation of an empty speed series")
    rho = math.fsum(vals) / m
    if min(vals) == max(vals):
        return SpeedStats(rho_cs=vals[0], xi2_cs=0.0, xi_cs=0.0)
    k = vals[0]
    d = [v - k for v in vals]
    s = math.fsum(d)
    s2 = math.fsum(x * x for x in d)
    xi2 = max((m * s2 - s * s) / (m * m), 0.0)
    return SpeedStats(rho_cs=rho, xi2_cs=xi2, xi_cs=math.sqrt(xi2))


def std_deviation_two_pass(series: SpeedSeries | Sequence[float]) -> SpeedStats:
    """Reference form: mean first, then the mean of squared deviations."""
    vals = _as_values(series)
    if not vals:
        raise EmptySeriesError("standard deviation of an empty speed series")
    rho = math.fsum(vals) / len(vals)
    xi2 = math.fsum((v - rho) ** 2 for v in vals) / len(vals)
    return SpeedStats(rho_cs=rho, xi2_cs=xi2, xi_cs=math.sqrt(xi2))


def deviation_delta(xi_history: Sequence[float], xi_current: float, window: int | None = None) -> float:
    """Sum of previously observed deviations minus the current one.

    ``window`` limits the sum to the most recent entries; ``None`` sums the
    whole history.
    """
    if window is not None:
        if window < 1:
            raise ValueError("window must be positive")
        xi_history = list(xi_history)[-window:]
    return math.fsum(xi_history) - xi_current


def default_zero_eps(xi_history: Sequence[float], window: int | None = None) -> float:
    """Absolute tolerance ``1e-9 * max(1, sum(history))``."""
    recent = list(xi_history) if window is None else list(xi_history)[-window:]
    return 1e-9 * max(1.0, math.fsum(recent))


def sign_of(e_cs: float, zero_eps: float = 0.0) -> int:
    if zero_eps < 0:
        raise ValueError("zero_eps must be non-negative")
    if abs(e_cs) <= zero_eps:
        return 0
    return 1 if e_cs > 0 else -1
