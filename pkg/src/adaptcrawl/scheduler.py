"""Master scheduler: FIFO request queue, domain hand-out, wait signalling and the stores.

IWMs never touch the output files themselves; every record goes through
:meth:`Scheduler.submit` so each file has exactly one writer.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator

logger = logging.getLogger(__name__)

LOG_COLUMNS = ("t_sec", "iwm_id", "c_si", "xi_cs", "e_cs_sign", "p_t", "l_igh", "l_d")

NEED_URLS = "need-urls"
REPORT_RESULTS = "report-results"
REPORT_LOG = "report-log"
KINDS = (NEED_URLS, REPORT_RESULTS, REPORT_LOG)


class RegistrationError(KeyError):
    pass


class StorageError(RuntimeError):
    pass


class CrawlLogError(ValueError):
    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


@dataclass(frozen=True)
class CrawlLogEntry:
    t: float
    iwm_id: str
    c_si: float
    xi_cs: float
    e_cs_sign: int
    p_t: int
    l_igh: int
    l_d: int

    def row(self) -> str:
        return (f"{self.t!r},{self.iwm_id},{self.c_si!r},{self.xi_cs!r},"
                f"{self.e_cs_sign},{self.p_t},{self.l_igh},{self.l_d}\n")


@dataclass(frozen=True)
class UrlStoreEntry:
    url: str
    topic: str
    score: float
    fetched_at: float

    def record(self) -> dict:
        return {"url": self.url, "topic": self.topic, "score": self.score, "fetched_at": self.fetched_at}


@dataclass(frozen=True)
class DocEntry:
    url: str
    text: str
    links: tuple[str, ...] = ()

    def record(self) -> dict:
        return {"url": self.url, "text": self.text, "links": list(self.links)}


@dataclass(frozen=True)
class IwmRequest:
    iwm_id: str
    kind: str
    payload: Any = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown request kind {self.kind!r}")


@dataclass(frozen=True)
class Assignment:
    iwm_id: str
    domain: Any


@dataclass(frozen=True)
class Wait:
    iwm_id: str


@dataclass
class Results:
    """Payload of a report-results request."""

    urls: list[UrlStoreEntry] = field(default_factory=list)
    docs: list[DocEntry] = field(default_factory=list)
    domains: list[Any] = field(default_factory=list)


class _LineFile:
    """Append-only text file written in whole lines.

    Lines are buffered in memory and written with a single ``write`` per
    flush, so a crash between flushes leaves the file ending on a newline.
    """

    def __init__(self, path: Path, header: str | None = None, flush_every: int = 64):
        self.path = Path(path)
        self.flush_every = flush_every
        self._pending: list[str] = []
        self.count = 0
        try:
            self._fh = open(self.path, "w", encoding="utf-8", newline="")
            if header is not None:
                self._fh.write(header)
                self._fh.flush()
        except OSError as exc:
            raise StorageError(f"cannot open {self.path}: {exc}") from exc

    def append(self, line: str) -> int:
        if not line.endswith("\n") or "\n" in line[:-1]:
            raise ValueError("records must be exactly one line")
        self._pending.append(line)
        self.count += 1
        if len(self._pending) >= self.flush_every:
            self.flush()
        return self.count

    def flush(self) -> None:
        if not self._pending:
            return
        chunk = "".join(self._pending)
        try:
            self._fh.write(chunk)
            self._fh.flush()
        except OSError as exc:
            raise StorageError(f"write to {self.path} failed: {exc}") from exc
        self._pending.clear()

    def close(self) -> None:
        if self._fh.closed:
            return
        self.flush()
        self._fh.close()


class Stores:
    """Crawl log (CSV), URL_store and DOC_tab (JSON lines) under one directory."""

    def __init__(self, out_dir: str | Path, flush_every: int = 64):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        self.log_path = out / "crawl_log.csv"
        self.url_path = out / "url_store.jsonl"
        self.doc_path = out / "doc_tab.jsonl"
        self._log = _LineFile(self.log_path, ",".join(LOG_COLUMNS) + "\n", flush_every)
        self._urls = _LineFile(self.url_path, None, flush_every)
        self._docs = _LineFile(self.doc_path, None, flush_every)
        self._stored_urls: set[str] = set()
        self._last_t: dict[str, float] = {}

    def persist(self, entry: CrawlLogEntry | UrlStoreEntry | DocEntry) -> int:
        if isinstance(entry, CrawlLogEntry):
            last = self._last_t.get(entry.iwm_id)
            if last is not None and entry.t < last:
                raise ValueError(f"log time went backwards for {entry.iwm_id}")
            self._last_t[entry.iwm_id] = entry.t
            return self._log.append(entry.row())
        if isinstance(entry, UrlStoreEntry):
            self._stored_urls.add(entry.url)
            return self._urls.append(json.dumps(entry.record(), ensure_ascii=False) + "\n")
        if isinstance(entry, DocEntry):
            if entry.url not in self._stored_urls:
                raise ValueError(f"document for {entry.url} has no URL_store entry")
            return self._docs.append(json.dumps(entry.record(), ensure_ascii=False) + "\n")
        raise TypeError(f"cannot persist {type(entry).__name__}")

    def flush(self) -> None:
        for f in (self._log, self._urls, self._docs):
            f.flush()

    def close(self) -> None:
        for f in (self._log, self._urls, self._docs):
            f.close()


class MemoryStores:
    """In-memory stand-in with the same integrity checks."""

    def __init__(self):
        self.log: list[CrawlLogEntry] = []
        self.urls: list[UrlStoreEntry] = []
        self.docs: list[DocEntry] = []

    def persist(self, entry) -> int:
        if isinstance(entry, CrawlLogEntry):
            self.log.append(entry)
            return len(self.log)
        if isinstance(entry, UrlStoreEntry):
            self.urls.append(entry)
            return len(self.urls)
        if isinstance(entry, DocEntry):
            if entry.url not in {u.url for u in self.urls}:
                raise ValueError(f"document for {entry.url} has no URL_store entry")
            self.docs.append(entry)
            return len(self.docs)
        raise TypeError(f"cannot persist {type(entry).__name__}")

    def flush(self) -> None:
        pass

    def close(self) -> None:
        pass


def _domain_key(domain: Any) -> Any:
    return getattr(domain, "key", domain)


class Scheduler:
    def __init__(self, stores=None, domains=()):
        self.stores = stores if stores is not None else MemoryStores()
        self._registered: set[str] = set()
        self._queue: deque[IwmRequest] = deque()
        self._waiting: deque[str] = deque()
        self._domains: deque[Any] = deque()
        self._known: set[Any] = set()
        self.submitted = 0
        for d in domains:
            self.add_domain(d)

    def register(self, iwm_id: str) -> None:
        self._registered.add(iwm_id)

    def add_domain(self, domain: Any) -> bool:
        key = _domain_key(domain)
        if key in self._known:
            return False
        self._known.add(key)
        self._domains.append(domain)
        return True

    @property
    def available(self) -> int:
        return len(self._domains)

    @property
    def waiting(self) -> list[str]:
        return list(self._waiting)

    def submit(self, req: IwmRequest) -> int:
        if req.iwm_id not in self._registered:
            raise RegistrationError(f"IWM {req.iwm_id!r} is not registered")
        self._queue.append(req)
        self.submitted += 1
        return self.submitted

    def dispatch(self) -> list[Assignment | Wait]:
        """Drain the queue in arrival order.

        Need-urls requests get the oldest unassigned domain or a wait signal;
        waiters are served ahead of newer requests once domains appear.
        """
        out: list[Assignment | Wait] = []
        while self._waiting and self._domains:
            out.append(Assignment(self._waiting.popleft(), self._domains.popleft()))
        while self._queue:
            req = self._queue.popleft()
            if req.kind == NEED_URLS:
                if req.iwm_id in self._waiting:
                    continue
                if self._domains and not self._waiting:
                    out.append(Assignment(req.iwm_id, self._domains.popleft()))
                else:
                    self._waiting.append(req.iwm_id)
                    out.append(Wait(req.iwm_id))
            elif req.kind == REPORT_LOG:
                entries = req.payload if isinstance(req.payload, list) else [req.payload]
                for e in entries:
                    self.stores.persist(e)
            else:
                res: Results = req.payload
                for u in res.urls:
                    self.stores.persist(u)
                for d in res.docs:
                    self.stores.persist(d)
                for dom in res.domains:
                    self.add_domain(dom)
                while self._waiting and self._domains:
                    out.append(Assignment(self._waiting.popleft(), self._domains.popleft()))
        return out

    def close(self) -> None:
        self.stores.close()


def iter_crawl_log(path: str | Path) -> Iterator[CrawlLogEntry]:
    """Parse and validate a crawl log; raises :class:`CrawlLogError` with the row number."""
    with open(path, newline="", encoding="utf-8") as fh:
        yield from parse_crawl_log(fh)


def parse_crawl_log(fh: io.TextIOBase) -> Iterator[CrawlLogEntry]:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise CrawlLogError(1, "missing header") from None
    if tuple(header) != LOG_COLUMNS:
        raise CrawlLogError(1, f"unexpected header {','.join(header)!r}")
    last_t: dict[str, float] = {}
    for rowno, row in enumerate(reader, 2):
        if len(row) != len(LOG_COLUMNS):
            raise CrawlLogError(rowno, f"expected {len(LOG_COLUMNS)} fields, got {len(row)}")
        try:
            entry = CrawlLogEntry(
                t=float(row[0]), iwm_id=row[1], c_si=float(row[2]), xi_cs=float(row[3]),
                e_cs_sign=int(row[4]), p_t=int(row[5]), l_igh=int(row[6]), l_d=int(row[7]),
            )
        except ValueError as exc:
            raise CrawlLogError(rowno, str(exc)) from None
        if not all(math.isfinite(v) for v in (entry.t, entry.c_si, entry.xi_cs)):
            raise CrawlLogError(rowno, "non-finite value")
        if entry.e_cs_sign not in (-1, 0, 1):
            raise CrawlLogError(rowno, f"sign {entry.e_cs_sign} not in {{-1, 0, 1}}")
        prev = last_t.get(entry.iwm_id)
        if prev is not None and entry.t < prev:
            raise CrawlLogError(rowno, f"time decreases for {entry.iwm_id} ({prev} -> {entry.t})")
        last_t[entry.iwm_id] = entry.t
        yield entry


def read_crawl_log(path: str | Path) -> list[CrawlLogEntry]:
    return list(iter_crawl_log(path))
