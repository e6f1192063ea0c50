"""A deterministic synthetic web for desk-scale crawling experiments.

Every page is derived from ``(rng_seed, url)`` alone, so the graph never has
to be materialised: any site index and page number can be generated lazily.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from urllib.parse import urlsplit

from .bandwidth import BandwidthProfile, bandwidth_at
from .base import FetchResult

HOST_SUFFIX = ".sim"

_FILLER = (
    "garden recipe travel engine market weather music movie river forest "
    "coffee kitchen design camera phone bicycle museum library poetry novel "
    "physics chemistry biology history mountain island village harbour bridge "
    "castle painting sculpture theatre festival summer winter autumn spring "
    "holiday hotel flight train station ticket shopping fashion fabric leather "
    "timber copper silver marble pottery carpet window door roof chimney lamp"
).split()

_TOPIC_TERMS = "news breaking headline report world politics journalist press".split()


@dataclass(frozen=True)
class SimPage:
    url: str
    size_kb: float
    latency: float
    text: str
    links: tuple[str, ...]


@dataclass(frozen=True)
class SyntheticWeb:
    pages_per_site: int = 40
    links_per_page: int = 6
    cross_site_prob: float = 0.15
    relevant_prob: float = 0.5
    page_kb_min: float = 18.0
    page_kb_max: float = 22.0
    latency_min: float = 0.05
    latency_max: float = 0.15
    words_per_page: int = 120
    topic_share: float = 0.25
    n_sites: int = 1_000_000
    broken_link_prob: float = 0.0
    timeout: float = 10.0
    rng_seed: int = 0
    topic_terms: tuple[str, ...] = field(default=tuple(_TOPIC_TERMS))

    def __post_init__(self):
        if self.pages_per_site < 1 or self.links_per_page < 0 or self.n_sites < 1:
            raise ValueError("pages_per_site, n_sites must be >= 1 and links_per_page >= 0")
        if not 0 < self.page_kb_min <= self.page_kb_max:
            raise ValueError("page size bounds must satisfy 0 < min <= max")
        if not 0 <= self.latency_min <= self.latency_max:
            raise ValueError("latency bounds must satisfy 0 <= min <= max")
        for name in ("cross_site_prob", "relevant_prob", "topic_share", "broken_link_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if not self.timeout > 0:
            raise ValueError("timeout must be positive")

    @staticmethod
    def site_url(site: int, page: int = 0) -> str:
        host = f"http://site{site:07d}{HOST_SUFFIX}"
        return f"{host}/" if page == 0 else f"{host}/p/{page}"

    def locate(self, url: str) -> tuple[int, int] | None:
        parts = urlsplit(url)
        host = parts.hostname or ""
        if not (host.startswith("site") and host.endswith(HOST_SUFFIX)):
            return None
        try:
            site = int(host[4 : -len(HOST_SUFFIX)])
        except ValueError:
            return None
        if not 0 <= site < self.n_sites:
            return None
        path = parts.path or "/"
        if path == "/":
            page = 0
        elif path.startswith("/p/"):
            try:
                page = int(path[3:])
            except ValueError:
                return None
        else:
            return None
        if not 0 <= page < self.pages_per_site:
            return None
        return site, page

    def page(self, url: str) -> SimPage | None:
        where = self.locate(url)
        if where is None:
            return None
        site, page = where
        rng = random.Random(f"{self.rng_seed}:{site}:{page}")
        if page and rng.random() < self.broken_link_prob:
            return None
        size = rng.uniform(self.page_kb_min, self.page_kb_max)
        latency = rng.uniform(self.latency_min, self.latency_max)
        relevant = rng.random() < self.relevant_prob
        words = []
        for _ in range(self.words_per_page):
            if relevant and rng.random() < self.topic_share:
                words.append(rng.choice(self.topic_terms))
            else:
                words.append(rng.choice(_FILLER))
        links = []
        for _ in range(self.links_per_page):
            if rng.random() < self.cross_site_prob:
                links.append(self.site_url(rng.randrange(self.n_sites)))
            else:
                links.append(self.site_url(site, rng.randrange(self.pages_per_site)))
        return SimPage(self.site_url(site, page), size, latency, " ".join(words), tuple(links))


def sim_fetch(web: SyntheticWeb, profile: BandwidthProfile, url: str, active_robots: int, t: float) -> FetchResult:
    """Single-fetch estimate under a static fair share of the bandwidth at ``t``."""
    if active_robots < 1:
        raise ValueError("active_robots must be >= 1")
    page = web.page(url)
    if page is None:
        return FetchResult(url, ok=False, duration=web.timeout, error="not-found",
                           started_at=t, finished_at=t + web.timeout)
    share = bandwidth_at(profile, t) / active_robots
    duration = page.latency + page.size_kb / share
    return FetchResult(url, ok=True, bytes=page.size_kb, duration=duration, text=page.text,
                       links=list(page.links), started_at=t, finished_at=t + duration)
