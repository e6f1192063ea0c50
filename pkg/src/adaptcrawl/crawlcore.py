"""Level-wise focused crawling over independent hypertext graphs.

An :class:`IntelligentWebMiner` (IWM) crawls one graph at a time, depth by
depth.  Each level is fetched with as many concurrent robots as the controller
allows, every document is scored against the graph's topic, and after the
level barrier the crawl speed is fed back to the controller and the graph's
speed/relevance state is advanced.
"""

from __future__ import annotations

import logging
from collections import defaultdict, deque
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import urlsplit, urlunsplit

from .controller import ControllerConfig, ControllerDecision, LearnerState, learn_step
from .relevance import DEFAULT_THRESHOLD, Topic, classify
from .scheduler import (
    NEED_URLS, REPORT_LOG, REPORT_RESULTS, Assignment, CrawlLogEntry, DocEntry, IwmRequest, Results,
    Scheduler, UrlStoreEntry, Wait,
)
from .stats import SpeedSample, SpeedSeries, crawl_speed, std_deviation
from .statemachine import CrawlState, Observation, should_halt, transition

logger = logging.getLogger(__name__)


class InvalidUrl(ValueError):
    pass


class EmptyGraphError(ValueError):
    pass


def canonicalize(url: str) -> str:
    """Lower-case scheme and host, drop the fragment, default the path to ``/``."""
    try:
        parts = urlsplit(url.strip())
    except ValueError as exc:
        raise InvalidUrl(f"malformed URL {url!r}") from exc
    scheme = parts.scheme.lower()
    if scheme not in ("http", "https") or not parts.hostname:
        raise InvalidUrl(f"not an absolute http(s) URL: {url!r}")
    try:
        port = parts.port
    except ValueError as exc:
        raise InvalidUrl(f"bad port in {url!r}") from exc
    host = parts.hostname.lower()
    if port is not None and port != {"http": 80, "https": 443}[scheme]:
        host = f"{host}:{port}"
    return urlunsplit((scheme, host, parts.path or "/", parts.query, ""))


def site_of(url: str) -> str:
    parts = urlsplit(url)
    return f"{parts.scheme}://{parts.netloc}/"


@dataclass
class UrlRecord:
    url: str
    l_igh: int
    l_d: int
    parent: str | None = None
    relevant: bool | None = None
    fetched_at: float | None = None
    score: float | None = None


@dataclass(frozen=True)
class GraphConfig:
    d_ms: int
    seed_urls: tuple[str, ...]
    topic: str

    def __post_init__(self):
        if self.d_ms < 1:
            raise ValueError("d_ms must be >= 1")
        if not self.seed_urls:
            raise ValueError("a graph needs at least one seed URL")
        object.__setattr__(self, "seed_urls", tuple(self.seed_urls))

    @property
    def key(self) -> str:
        try:
            return site_of(canonicalize(self.seed_urls[0]))
        except InvalidUrl:
            return self.seed_urls[0]


class Frontier:
    """Per-graph, per-depth queues with one global seen-set."""

    def __init__(self):
        self.queues: dict[int, dict[int, deque[UrlRecord]]] = {}
        self.configs: dict[int, GraphConfig] = {}
        self.seen: set[str] = set()
        self.order: deque[int] = deque()
        self.current_l_igh: int | None = None
        self.current_l_d = 0
        self._last_igh = 0

    def seed(self, cfg: GraphConfig) -> tuple[int, list[str]]:
        """Open a new graph; returns its index and the rejected seed URLs."""
        skipped, records = [], []
        for raw in cfg.seed_urls:
            try:
                url = canonicalize(raw)
            except InvalidUrl:
                skipped.append(raw)
                continue
            if url in self.seen:
                continue
            self.seen.add(url)
            records.append(url)
        if not records and len(skipped) == len(cfg.seed_urls):
            raise EmptyGraphError(f"no valid seed URL among {list(cfg.seed_urls)}")
        self._last_igh += 1
        l_igh = self._last_igh
        self.configs[l_igh] = cfg
        self.queues[l_igh] = defaultdict(deque)
        self.queues[l_igh][0].extend(UrlRecord(u, l_igh, 0) for u in records)
        self.order.append(l_igh)
        if self.current_l_igh is None:
            self._enter_next_graph()
        return l_igh, skipped

    def pending(self, l_igh: int | None = None, l_d: int | None = None) -> int:
        l_igh = self.current_l_igh if l_igh is None else l_igh
        if l_igh is None:
            return 0
        l_d = self.current_l_d if l_d is None else l_d
        return len(self.queues[l_igh].get(l_d, ()))

    def next_batch(self, c_t: int) -> list[UrlRecord]:
        if c_t < 1:
            raise ValueError("c_t must be >= 1")
        if self.current_l_igh is None:
            return []
        q = self.queues[self.current_l_igh].get(self.current_l_d)
        if not q:
            return []
        return [q.popleft() for _ in range(min(c_t, len(q)))]

    def take_level(self) -> list[UrlRecord]:
        return self.next_batch(max(1, self.pending()))

    def register_children(self, parent: UrlRecord, links: list[str]) -> int:
        d_ms = self.configs[parent.l_igh].d_ms
        depth = parent.l_d + 1
        if depth > d_ms:
            return 0
        inserted = 0
        q = self.queues[parent.l_igh][depth]
        for raw in links:
            try:
                url = canonicalize(raw)
            except InvalidUrl:
                continue
            if url in self.seen:
                continue
            self.seen.add(url)
            q.append(UrlRecord(url, parent.l_igh, depth, parent=parent.url))
            inserted += 1
        return inserted

    def _enter_next_graph(self) -> None:
        while self.order:
            l_igh = self.order.popleft()
            if self.queues[l_igh].get(0):
                self.current_l_igh, self.current_l_d = l_igh, 0
                return
        self.current_l_igh, self.current_l_d = None, 0

    def advance(self) -> None:
        """Move past the current level; next graph once depth or supply runs out."""
        if self.current_l_igh is None:
            return
        if self.pending():
            return
        cfg = self.configs[self.current_l_igh]
        self.current_l_d += 1
        if self.current_l_d > cfg.d_ms or not self.pending():
            self.drop_current()

    def drop_current(self) -> None:
        if self.current_l_igh is not None:
            self.queues[self.current_l_igh].clear()
        self._enter_next_graph()

    @property
    def exhausted(self) -> bool:
        return self.current_l_igh is None


@dataclass
class LevelReport:
    iwm_id: str
    l_igh: int
    l_d: int
    robots: int = 0
    fetched: int = 0
    ok: int = 0
    relevant: int = 0
    failed: int = 0
    c_si: float | None = None
    decision: ControllerDecision | None = None
    state: CrawlState | None = None
    halted: bool = False
    skipped: bool = False
    started_at: float = 0.0
    finished_at: float = 0.0
    max_in_flight: int = 0


class IntelligentWebMiner:
    """One crawling unit: frontier, controller and robot pool over a backend."""

    def __init__(
        self,
        iwm_id: str,
        backend,
        topics: dict[str, Topic],
        controller: ControllerConfig | None = None,
        relevance_threshold: float = DEFAULT_THRESHOLD,
        send=None,
    ):
        self.iwm_id = iwm_id
        self.backend = backend
        self.topics = topics
        self.cfg = controller or ControllerConfig()
        self.relevance_threshold = relevance_threshold
        self.send = send or (lambda req: None)
        self.learner = LearnerState.fresh(self.cfg)
        self.frontier = Frontier()
        self.states: dict[int, CrawlState] = {}
        self.halted: set[int] = set()
        self.series = SpeedSeries()
        self.cycle_start = 0.0
        self.cycle_visited = 0
        self.total_visited = 0
        self.total_relevant = 0
        self.levels: list[LevelReport] = []
        self.log: list[CrawlLogEntry] = []
        self.waiting = False
        self.finished = False

    @property
    def clock(self) -> float:
        return self.backend.now()

    @property
    def idle(self) -> bool:
        return self.frontier.exhausted

    def assign(self, cfg: GraphConfig) -> int | None:
        """Start a fresh work cycle on a scheduler-delivered graph."""
        self.waiting = False
        self.cycle_start = self.clock
        self.cycle_visited = 0
        try:
            l_igh, skipped = self.frontier.seed(cfg)
        except EmptyGraphError as exc:
            logger.warning("%s: %s", self.iwm_id, exc)
            return None
        for url in skipped:
            logger.info("%s: skipped malformed seed %r", self.iwm_id, url)
        self.states[l_igh] = CrawlState()
        return l_igh

    def run_level(self) -> LevelReport:
        fr = self.frontier
        l_igh, l_d = fr.current_l_igh, fr.current_l_d
        if l_igh is None:
            raise RuntimeError("no level to crawl")
        report = LevelReport(self.iwm_id, l_igh, l_d, started_at=self.clock)
        state = self.states.setdefault(l_igh, CrawlState())
        if should_halt(state) or l_igh in self.halted:
            self.halted.add(l_igh)
            fr.drop_current()
            report.skipped = report.halted = True
            report.state = state
            report.finished_at = self.clock
            self.levels.append(report)
            return report

        cfg = fr.configs[l_igh]
        topic = self.topics.get(cfg.topic)
        records = fr.take_level()
        robots = self.learner.p_t
        report.robots = robots
        probe = self.backend.probe
        peak_before = probe.max_in_flight
        probe.max_in_flight = 0
        results = self.backend.fetch_level([r.url for r in records], robots)
        report.max_in_flight = probe.max_in_flight
        probe.max_in_flight = max(peak_before, report.max_in_flight)

        # barrier passed: every robot of this level has returned
        out = Results()
        for rec, res in zip(records, results):
            report.fetched += 1
            if not res.ok:
                report.failed += 1
                continue
            report.ok += 1
            rec.fetched_at = res.finished_at
            rec.score = topic.score(res.text) if topic else 0.0
            rec.relevant = classify(rec.score, self.relevance_threshold)
            same_site, other_sites = [], []
            here = site_of(rec.url)
            for link in res.links:
                try:
                    canon = canonicalize(link)
                except InvalidUrl:
                    continue
                (same_site if site_of(canon) == here else other_sites).append(canon)
            fr.register_children(rec, same_site)
            if rec.relevant:
                report.relevant += 1
                out.urls.append(UrlStoreEntry(rec.url, cfg.topic, rec.score, rec.fetched_at))
                out.docs.append(DocEntry(rec.url, res.text, tuple(res.links)))
                for link in other_sites:
                    out.domains.append(GraphConfig(cfg.d_ms, (site_of(link),), cfg.topic))

        self.cycle_visited += report.ok
        self.total_visited += report.ok
        self.total_relevant += report.relevant
        now = self.clock
        report.finished_at = now
        if now > self.cycle_start:
            c_si = crawl_speed(self.cycle_visited, self.cycle_start, now)
            decision = learn_step(self.learner, self.cfg, c_si)
            report.c_si, report.decision = c_si, decision
            self.series.append(SpeedSample(now, self.total_visited, c_si))
            entry = CrawlLogEntry(now, self.iwm_id, c_si, decision.xi_cs, decision.e_cs_sign,
                                  decision.p_t_new, l_igh, l_d)
            self.log.append(entry)
            self.send(IwmRequest(self.iwm_id, REPORT_LOG, entry))
            obs = Observation(speed_ok=c_si > self.learner.threshold(self.cfg), relevance_ok=report.relevant > 0)
            state = transition(state, obs)
            self.states[l_igh] = state
        if out.urls or out.domains:
            self.send(IwmRequest(self.iwm_id, REPORT_RESULTS, out))
        report.state = state
        if should_halt(state):
            self.halted.add(l_igh)
            report.halted = True
            fr.drop_current()
        else:
            fr.advance()
        self.levels.append(report)
        return report


@dataclass
class CrawlSession:
    start_t: float = 0.0
    elapsed: float = 0.0
    total_visited: int = 0
    total_relevant: int = 0
    levels: int = 0
    graphs: int = 0
    halted_graphs: int = 0
    critic_resets: int = 0
    rho_cs: float | None = None
    xi_cs: float | None = None
    final_p_t: dict[str, int] = field(default_factory=dict)
    states: dict[str, dict[int, str]] = field(default_factory=dict)
    max_in_flight_over_limit: int = 0

    def summary(self) -> dict:
        return {
            "total_visited": self.total_visited,
            "total_relevant": self.total_relevant,
            "mean_c_si": self.rho_cs,
            "xi_cs": self.xi_cs,
            "final_p_t": self.final_p_t,
            "elapsed_sec": self.elapsed,
            "levels": self.levels,
            "graphs": self.graphs,
            "halted_graphs": self.halted_graphs,
            "critic_resets": self.critic_resets,
        }


def run_session(
    configs: list[GraphConfig],
    iwms: list[IntelligentWebMiner],
    scheduler: Scheduler,
    budget_sec: float | None = None,
    max_levels: int | None = None,
) -> CrawlSession:
    """Drive the IWMs until every graph is halted or exhausted, or the budget runs out.

    The IWM whose clock is furthest behind always moves next, which keeps
    multi-IWM simulations deterministic.
    """
    if not iwms:
        raise ValueError("need at least one IWM")
    for iwm in iwms:
        scheduler.register(iwm.iwm_id)
        iwm.send = scheduler.submit
    for cfg in configs:
        scheduler.add_domain(cfg)
    by_id = {i.iwm_id: i for i in iwms}
    session = CrawlSession(start_t=min(i.clock for i in iwms))
    levels = 0

    def deliver(now: float) -> None:
        for resp in scheduler.dispatch():
            iwm = by_id[resp.iwm_id]
            if isinstance(resp, Assignment):
                iwm.backend.advance_to(now)
                if iwm.assign(resp.domain) is not None:
                    session.graphs += 1
            elif isinstance(resp, Wait):
                iwm.waiting = True

    while True:
        runnable = [i for i in iwms if not i.finished and not i.waiting]
        if not runnable:
            break
        iwm = min(runnable, key=lambda i: (i.clock, i.iwm_id))
        if budget_sec is not None and iwm.clock - session.start_t >= budget_sec:
            iwm.finished = True
            continue
        if max_levels is not None and levels >= max_levels:
            break
        if iwm.idle:
            scheduler.submit(IwmRequest(iwm.iwm_id, NEED_URLS))
            deliver(iwm.clock)
            if iwm.idle and not iwm.waiting:
                # assignment had no usable seed; ask again next round
                continue
            continue
        iwm.run_level()
        levels += 1
        deliver(iwm.clock)

    scheduler.stores.flush()
    values = [e.c_si for i in iwms for e in i.log]
    if values:
        st = std_deviation(values)
        session.rho_cs, session.xi_cs = st.rho_cs, st.xi_cs
    session.elapsed = max(i.clock for i in iwms) - session.start_t
    session.total_visited = sum(i.total_visited for i in iwms)
    session.total_relevant = sum(i.total_relevant for i in iwms)
    session.levels = levels
    session.halted_graphs = sum(len(i.halted) for i in iwms)
    session.critic_resets = sum(i.learner.critic_resets for i in iwms)
    session.final_p_t = {i.iwm_id: i.learner.p_t for i in iwms}
    session.states = {i.iwm_id: {k: str(v) for k, v in sorted(i.states.items())} for i in iwms}
    session.max_in_flight_over_limit = sum(i.backend.probe.violations for i in iwms)
    return session


def parse_seed_file(text: str, source: str = "<seeds>") -> list[GraphConfig]:
    """Parse ``topic<TAB>d_ms<TAB>url[,url...]`` lines."""
    configs = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ValueError(f"{source}:{lineno}: expected 'topic<TAB>d_ms<TAB>urls'")
        topic, d_ms, urls = fields
        try:
            depth = int(d_ms)
        except ValueError:
            raise ValueError(f"{source}:{lineno}: d_ms must be an integer, got {d_ms!r}") from None
        seeds = tuple(u.strip() for u in urls.split(",") if u.strip())
        try:
            configs.append(GraphConfig(depth, seeds, topic.strip()))
        except ValueError as exc:
            raise ValueError(f"{source}:{lineno}: {exc}") from None
    return configs


def load_seed_file(path: str | Path) -> list[GraphConfig]:
    return parse_seed_file(Path(path).read_text(encoding="utf-8"), str(path))
