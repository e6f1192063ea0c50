from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class FetchResult:
    url: str
    ok: bool
    bytes: float = 0.0  # kilobytes
    duration: float = 0.0
    text: str = ""
    links: list[str] = field(default_factory=list)
    error: str | None = None
    started_at: float = 0.0
    finished_at: float = 0.0

    def __post_init__(self):
        if self.ok and not self.duration > 0:
            raise ValueError("successful fetch must take positive time")
