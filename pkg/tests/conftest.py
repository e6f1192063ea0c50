from __future__ import annotations

from pathlib import Path

import pytest

from adaptcrawl.config import RunConfig
from adaptcrawl.runner import execute_run

REPO = Path(__file__).resolve().parent.parent
DATA = REPO / "data"
GOLDEN = Path(__file__).resolve().parent / "golden"

RAMP_PROFILE = DATA / "bandwidth_profile.csv"
SEEDS = DATA / "seeds.tsv"


def ramp_config(out: Path, seed: int = 1, **overrides) -> RunConfig:
    """The 18 -> 2 kB/s ramp session over 15000 simulated seconds."""
    cfg = RunConfig(mode="sim", seeds=str(SEEDS), profile=str(RAMP_PROFILE), out=str(out), rng_seed=seed,
                    budget_sec=15000.0)
    for k, v in overrides.items():
        setattr(cfg, k, v)
    cfg.validate()
    return cfg


def run_ramp(out: Path, seed: int = 1, **overrides):
    cfg = ramp_config(out, seed, **overrides)
    session, iwms = execute_run(cfg)
    return cfg, session, iwms


@pytest.fixture(scope="session")
def ramp_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("ramp")
    return run_ramp(out)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
