from __future__ import annotations

import json
import logging
import math
from pathlib import Path

from .config import ConfigError, RunConfig
from .crawlcore import CrawlSession, IntelligentWebMiner, load_seed_file, run_session
from .fetcher import LiveBackend, SimBackend, load_profile
from .relevance import load_topics
from .scheduler import Scheduler, Stores

logger = logging.getLogger(__name__)


def _noise_seed(rng_seed: int, k: int) -> int:
    return rng_seed * 1_000_003 + k


def build_iwms(cfg: RunConfig) -> list[IntelligentWebMiner]:
    try:
        topics = load_topics(cfg.topics)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"topics: {exc}") from None
    iwms = []
    if cfg.mode == "sim":
        try:
            profile = load_profile(cfg.profile)
        except OSError as exc:
            raise ConfigError(f"{cfg.profile}: {exc.strerror}") from None
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        web = cfg.synthetic_web()
        for k in range(cfg.iwms):
            noisy = profile.with_noise(cfg.noise_amplitude, _noise_seed(cfg.rng_seed, k))
            iwms.append(IntelligentWebMiner(f"iwm{k}", SimBackend(web, noisy), topics, cfg.controller(),
                                            cfg.relevance_threshold))
    else:
        for k in range(cfg.iwms):
            iwms.append(IntelligentWebMiner(f"iwm{k}", LiveBackend(cfg.timeout), topics, cfg.controller(),
                                            cfg.relevance_threshold))
    return iwms


def default_budget(cfg: RunConfig) -> float | None:
    """Sim runs default to the profile's last anchor; live runs go until exhausted."""
    if cfg.budget_sec is not None or cfg.mode != "sim":
        return cfg.budget_sec
    end = load_profile(cfg.profile).span[1]
    return end if math.isfinite(end) and end > 0 else None


def execute_run(cfg: RunConfig) -> tuple[CrawlSession, list[IntelligentWebMiner]]:
    """Run one crawl session and write its artifacts into ``cfg.out``."""
    try:
        graphs = load_seed_file(cfg.seeds)
    except OSError as exc:
        raise ConfigError(f"{cfg.seeds}: {exc.strerror}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    iwms = build_iwms(cfg)
    unknown = sorted({g.topic for g in graphs} - set(iwms[0].topics))
    if unknown:
        raise ConfigError(f"{cfg.seeds}: unknown topic(s) {', '.join(unknown)}")
    budget = default_budget(cfg)

    out = Path(cfg.out)
    scheduler = Scheduler(Stores(out))
    try:
        session = run_session(graphs, iwms, scheduler, budget)
    finally:
        scheduler.close()
    summary = dict(session.summary(), mode=cfg.mode, rng_seed=cfg.rng_seed, budget_sec=budget)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info("session finished: %d visited, %d relevant", session.total_visited, session.total_relevant)
    return session, iwms
