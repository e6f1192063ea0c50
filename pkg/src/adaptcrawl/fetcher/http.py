"""Live HTTP fetching with anchor extraction (stdlib only)."""

from __future__ import annotations

import socket
import time
import urllib.error
import urllib.request
from html.parser import HTMLParser
from urllib.parse import urljoin

from .base import FetchResult

USER_AGENT = "adaptcrawl/0.1"


class _AnchorParser(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.hrefs: list[str] = []
        self.chunks: list[str] = []
        self._skip = 0

    def handle_starttag(self, tag, attrs):
        if tag == "a":
            for name, value in attrs:
                if name == "href" and value:
                    self.hrefs.append(value)
        elif tag in ("script", "style"):
            self._skip += 1

    def handle_endtag(self, tag):
        if tag in ("script", "style") and self._skip:
            self._skip -= 1

    def handle_data(self, data):
        if not self._skip:
            self.chunks.append(data)


def extract_links(html: str, base_url: str) -> tuple[str, list[str]]:
    """Visible text and absolute http(s) anchor targets of ``html``."""
    parser = _AnchorParser()
    parser.feed(html)
    parser.close()
    links = []
    for href in parser.hrefs:
        absolute = urljoin(base_url, href.strip())
        if absolute.startswith(("http://", "https://")):
            links.append(absolute)
    return " ".join(" ".join(parser.chunks).split()), links


def http_fetch(url: str, timeout: float = 10.0) -> FetchResult:
    """Fetch one page; failures come back as ``ok=False`` with an error category.

    Categories: ``dns``, ``timeout/conn``, ``status``, ``parse``.
    """
    start = time.monotonic()

    def failed(category: str) -> FetchResult:
        return FetchResult(url, ok=False, duration=time.monotonic() - start, error=category)

    if not url.startswith(("http://", "https://")):
        return failed("parse")
    req = urllib.request.Request(url, headers={"User-Agent": USER_AGENT})
    try:
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            body = resp.read()
            ctype = resp.headers.get_content_type()
            charset = resp.headers.get_content_charset() or "utf-8"
            final_url = resp.geturl()
    except urllib.error.HTTPError:
        return failed("status")
    except urllib.error.URLError as exc:
        if isinstance(exc.reason, socket.gaierror):
            return failed("dns")
        return failed("timeout/conn")
    except (socket.timeout, TimeoutError, ConnectionError, OSError):
        return failed("timeout/conn")

    duration = max(time.monotonic() - start, 1e-9)
    size_kb = len(body) / 1000.0
    if ctype not in ("text/html", "application/xhtml+xml"):
        text = body.decode(charset, errors="replace") if ctype.startswith("text/") else ""
        return FetchResult(url, ok=True, bytes=size_kb, duration=duration, text=text)
    try:
        text, links = extract_links(body.decode(charset, errors="replace"), final_url)
    except Exception:  # html.parser is lenient; anything left is a genuinely broken document
        return failed("parse")
    return FetchResult(url, ok=True, bytes=size_kb, duration=duration, text=text, links=links)
