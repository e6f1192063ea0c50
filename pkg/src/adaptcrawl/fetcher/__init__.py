"""Fetch backends: a seeded bandwidth simulator and a live HTTP fetcher."""

from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor

from .bandwidth import TARGET_BW_KBPS, BandwidthProfile, bandwidth_at, load_profile, scale_speed, write_profile
from .base import FetchResult
from .http import extract_links, http_fetch
from .simnet import ConcurrencyProbe, SimNetwork
from .simweb import SimPage, SyntheticWeb, sim_fetch

__all__ = [
    "TARGET_BW_KBPS", "BandwidthProfile", "ConcurrencyProbe", "FetchResult", "LiveBackend", "SimBackend",
    "SimNetwork", "SimPage", "SyntheticWeb", "bandwidth_at", "extract_links", "http_fetch", "load_profile",
    "scale_speed", "sim_fetch", "write_profile",
]


class SimBackend:
    """Simulated link owned by one IWM; time is the simulation clock."""

    deterministic = True

    def __init__(self, web: SyntheticWeb, profile: BandwidthProfile, probe: ConcurrencyProbe | None = None):
        self.net = SimNetwork(web, profile, probe)

    @property
    def probe(self) -> ConcurrencyProbe:
        return self.net.probe

    def now(self) -> float:
        return self.net.now

    def advance_to(self, t: float) -> None:
        self.net.advance_to(t)

    def fetch_level(self, urls: list[str], robots: int) -> list[FetchResult]:
        return self.net.fetch_batch(urls, robots)


class LiveBackend:
    """Real HTTP with a thread per robot; time is wall-clock seconds since creation."""

    deterministic = False

    def __init__(self, timeout: float = 10.0, probe: ConcurrencyProbe | None = None, fetch=http_fetch):
        self.timeout = timeout
        self.probe = probe or ConcurrencyProbe()
        self._fetch = fetch
        self._t0 = time.monotonic()
        self._lock = threading.Lock()
        self._in_flight = 0

    def now(self) -> float:
        return time.monotonic() - self._t0

    def advance_to(self, t: float) -> None:
        pass

    def fetch_level(self, urls: list[str], robots: int) -> list[FetchResult]:
        if robots < 1:
            raise ValueError("robots must be >= 1")

        def one(url: str) -> FetchResult:
            with self._lock:
                self._in_flight += 1
                self.probe.observe(self.now(), self._in_flight, robots)
            start = self.now()
            try:
                res = self._fetch(url, self.timeout)
            finally:
                with self._lock:
                    self._in_flight -= 1
            res.started_at, res.finished_at = start, self.now()
            return res

        with ThreadPoolExecutor(max_workers=robots) as pool:
            return list(pool.map(one, urls))
