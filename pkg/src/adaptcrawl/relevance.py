"""Term-frequency vectors and cosine relevance against a topic."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

DEFAULT_THRESHOLD = 0.3

_TOKEN = re.compile(r"[0-9a-z]+")


@lru_cache(maxsize=1)
def stop_words() -> frozenset[str]:
    text = resources.files("adaptcrawl.data").joinpath("stopwords_en.txt").read_text(encoding="utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip() and not w.startswith("#"))


def tokenize(text: str) -> list[str]:
    stops = stop_words()
    return [tok for tok in _TOKEN.findall(text.lower()) if tok not in stops]


TermVector = dict[str, float]


def term_vector(terms: Iterable[str]) -> TermVector:
    return {t: float(n) for t, n in Counter(terms).items()}


def _norm_sq(v: Mapping[str, float]) -> float:
    return math.fsum(w * w for w in v.values())


def cosine(doc: Mapping[str, float], topic: Mapping[str, float]) -> float:
    nd, nt = _norm_sq(doc), _norm_sq(topic)
    if nd == 0.0 or nt == 0.0:
        return 0.0
    if len(doc) > len(topic):
        doc, topic = topic, doc
    dot = math.fsum(w * topic[t] for t, w in doc.items() if t in topic)
    # one square root keeps identical vectors at exactly 1
    return min(1.0, max(0.0, dot / math.sqrt(nd * nt)))


def classify(score: float, threshold: float = DEFAULT_THRESHOLD) -> bool:
    return score >= threshold


@dataclass(frozen=True)
class Topic:
    name: str
    keywords: tuple[str, ...]

    @property
    def vector(self) -> TermVector:
        return term_vector(tokenize(" ".join(self.keywords)))

    def score(self, text: str) -> float:
        return cosine(term_vector(tokenize(text)), self.vector)


def parse_topics(text: str, source: str = "<topics>") -> dict[str, Topic]:
    """Parse ``name<TAB>space-separated keywords`` lines."""
    topics: dict[str, Topic] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        name, sep, words = line.partition("\t")
        if not sep or not name.strip() or not words.split():
            raise ValueError(f"{source}:{lineno}: expected 'name<TAB>keywords'")
        topics[name.strip()] = Topic(name.strip(), tuple(words.split()))
    return topics


def load_topics(path: str | Path | None = None) -> dict[str, Topic]:
    if path is None:
        text = resources.files("adaptcrawl.data").joinpath("topics.tsv").read_text(encoding="utf-8")
        return parse_topics(text, "topics.tsv")
    return parse_topics(Path(path).read_text(encoding="utf-8"), str(path))
