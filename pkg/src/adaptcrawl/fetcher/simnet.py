"""Discrete-event fetch engine over a shared, fluctuating link.

A robot spends the page's latency idle, then transfers the page while the
link bandwidth is split equally among all robots currently transferring.
Rates are re-evaluated at every completion and at each noise-bucket boundary,
so the accounting is exact for the piecewise-constant rate it applies.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from .bandwidth import BandwidthProfile, bandwidth_at
from .base import FetchResult
from .simweb import SimPage, SyntheticWeb

_EPS = 1e-9


@dataclass
class ConcurrencyProbe:
    """Checks in-flight fetches against the robot limit at every event."""

    events: int = 0
    violations: int = 0
    max_in_flight: int = 0
    max_rate_error: float = 0.0
    keep_trace: bool = False
    trace: list[tuple[float, int, int]] = field(default_factory=list)

    def observe(self, t: float, in_flight: int, limit: int) -> None:
        self.events += 1
        self.max_in_flight = max(self.max_in_flight, in_flight)
        if in_flight > limit:
            self.violations += 1
        if self.keep_trace:
            self.trace.append((t, in_flight, limit))

    def rates(self, total_rate: float, bandwidth: float) -> None:
        self.max_rate_error = max(self.max_rate_error, abs(total_rate - bandwidth))


@dataclass
class _Job:
    index: int
    url: str
    page: SimPage | None
    started: float
    until: float = 0.0
    remaining: float = 0.0
    transferring: bool = False


class SimNetwork:
    def __init__(self, web: SyntheticWeb, profile: BandwidthProfile, probe: ConcurrencyProbe | None = None):
        self.web = web
        self.profile = profile
        self.probe = probe or ConcurrencyProbe()
        self.now = 0.0

    def advance_to(self, t: float) -> None:
        self.now = max(self.now, t)

    def _next_boundary(self) -> float:
        period = self.profile.noise_period
        return (math.floor(self.now / period) + 1) * period

    def fetch_batch(self, urls: list[str], robots: int) -> list[FetchResult]:
        """Fetch ``urls`` with at most ``robots`` in flight; returns once all are done."""
        if robots < 1:
            raise ValueError("robots must be >= 1")
        results: list[FetchResult | None] = [None] * len(urls)
        pending = deque(enumerate(urls))
        active: list[_Job] = []

        while pending or active:
            while pending and len(active) < robots:
                i, url = pending.popleft()
                page = self.web.page(url)
                wait = self.web.timeout if page is None else page.latency
                active.append(_Job(i, url, page, self.now, until=self.now + wait))
            self.probe.observe(self.now, len(active), robots)

            xfer = [j for j in active if j.transferring]
            rate = 0.0
            steps = [j.until - self.now for j in active if not j.transferring]
            if xfer:
                bw = bandwidth_at(self.profile, self.now)
                rate = bw / len(xfer)
                self.probe.rates(rate * len(xfer), bw)
                steps.extend(j.remaining / rate for j in xfer)
                steps.append(self._next_boundary() - self.now)
            dt = max(min(steps), 0.0)
            self.now += dt

            still: list[_Job] = []
            for j in active:
                if j.transferring:
                    j.remaining -= rate * dt
                    if j.remaining <= _EPS * max(1.0, j.page.size_kb):
                        results[j.index] = self._done(j)
                        continue
                elif j.until - self.now <= _EPS:
                    if j.page is None:
                        results[j.index] = FetchResult(
                            j.url, ok=False, duration=self.now - j.started, error="not-found",
                            started_at=j.started, finished_at=self.now,
                        )
                        continue
                    j.transferring = True
                    j.remaining = j.page.size_kb
                still.append(j)
            active = still
        return results  # type: ignore[return-value]

    def _done(self, job: _Job) -> FetchResult:
        page = job.page
        return FetchResult(
            job.url, ok=True, bytes=page.size_kb, duration=self.now - job.started, text=page.text,
            links=list(page.links), started_at=job.started, finished_at=self.now,
        )
