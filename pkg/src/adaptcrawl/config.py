"""Run configuration: ``key=value`` config files merged with command-line flags."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .controller import ControllerConfig
from .fetcher.simweb import SyntheticWeb
from .relevance import DEFAULT_THRESHOLD


class ConfigError(ValueError):
    pass


def _int(v: str) -> int:
    return int(v)


def _opt_float(v: str) -> float | None:
    return None if v.strip().lower() in ("auto", "none", "") else float(v)


def _opt_int(v: str) -> int | None:
    return None if v.strip().lower() in ("inf", "none", "all") else int(v)


# key -> (attribute, parser)
KEYS: dict[str, tuple[str, Any]] = {
    "mode": ("mode", str),
    "seeds": ("seeds", str),
    "profile": ("profile", str),
    "topics": ("topics", str),
    "out": ("out", str),
    "seed": ("rng_seed", _int),
    "budget_sec": ("budget_sec", _opt_float),
    "iwms": ("iwms", _int),
    "threads_min": ("threads_min", _int),
    "threads_max": ("threads_max", _int),
    "threads_init": ("threads_init", _int),
    "list_limit": ("list_limit", _int),
    "zero_freq_limit": ("zero_freq_limit", _int),
    "speed_threshold": ("speed_threshold", _opt_float),
    "window_w": ("window_w", _opt_int),
    "zero_rel_tol": ("zero_rel_tol", float),
    "relevance_threshold": ("relevance_threshold", float),
    "noise": ("noise_amplitude", float),
    "timeout": ("timeout", float),
}

_WEB_FIELDS = {f.name: f.type for f in dataclasses.fields(SyntheticWeb) if f.name not in ("rng_seed", "topic_terms")}


@dataclass
class RunConfig:
    mode: str = "sim"
    seeds: str | None = None
    profile: str | None = None
    topics: str | None = None
    out: str = "out"
    rng_seed: int = 0
    budget_sec: float | None = None
    iwms: int = 1
    threads_min: int = 1
    threads_max: int = 64
    threads_init: int = 1
    list_limit: int = 20
    zero_freq_limit: int = 5
    speed_threshold: float | None = None
    window_w: int | None = 1
    zero_rel_tol: float = 0.02
    relevance_threshold: float = DEFAULT_THRESHOLD
    noise_amplitude: float = 0.05
    timeout: float = 10.0
    web: dict[str, Any] = field(default_factory=dict)

    def controller(self) -> ControllerConfig:
        return ControllerConfig(
            list_limit_n=self.list_limit,
            zero_freq_limit=self.zero_freq_limit,
            speed_threshold=self.speed_threshold,
            p_min=self.threads_min,
            p_max=self.threads_max,
            p_init=self.threads_init,
            window_w=self.window_w,
            zero_rel_tol=self.zero_rel_tol,
        )

    def synthetic_web(self) -> SyntheticWeb:
        return SyntheticWeb(rng_seed=self.rng_seed, timeout=self.timeout, **self.web)

    def validate(self) -> None:
        if self.mode not in ("sim", "live"):
            raise ConfigError(f"mode must be 'sim' or 'live', got {self.mode!r}")
        if not self.seeds:
            raise ConfigError("a seed file is required (--seeds)")
        if self.mode == "sim" and not self.profile:
            raise ConfigError("sim mode requires a bandwidth profile (--profile)")
        if self.iwms < 1:
            raise ConfigError("iwms must be >= 1")
        if self.budget_sec is not None and not self.budget_sec > 0:
            raise ConfigError("budget_sec must be positive")
        if not 0.0 <= self.relevance_threshold <= 1.0:
            raise ConfigError("relevance_threshold must be in [0, 1]")
        try:
            self.controller()
            if self.mode == "sim":
                self.synthetic_web()
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None


def parse_config_text(text: str, source: str = "<config>") -> dict[str, Any]:
    """Parse ``key=value`` lines into RunConfig attribute values.

    ``web.<field>`` keys configure the synthetic web.  Errors name the line.
    """
    values: dict[str, Any] = {}
    web: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected key=value")
        if key.startswith("web."):
            name = key[4:]
            if name not in _WEB_FIELDS:
                raise ConfigError(f"{source}:{lineno}: unknown synthetic-web parameter {name!r}")
            conv = int if _WEB_FIELDS[name] in ("int", int) else float
            try:
                web[name] = conv(value)
            except ValueError:
                raise ConfigError(f"{source}:{lineno}: bad value {value!r} for {key}") from None
            continue
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        attr, conv = KEYS[key]
        try:
            values[attr] = conv(value)
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: bad value {value!r} for {key}") from None
    if web:
        values["web"] = web
    return values


def load_config_file(path: str | Path) -> dict[str, Any]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    return parse_config_text(text, str(path))


def build_run_config(file_values: dict[str, Any], flag_values: dict[str, Any]) -> RunConfig:
    cfg = RunConfig()
    # flag_values holds only the flags actually given; None there is a real override
    for source in (file_values, flag_values):
        for attr, value in source.items():
            if attr == "web":
                cfg.web.update(value)
            else:
                setattr(cfg, attr, value)
    cfg.validate()
    return cfg
