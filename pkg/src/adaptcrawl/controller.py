"""Robot-count learning from crawl-speed dispersion.

Each call to :func:`learn_step` folds one crawl-speed observation into the
learner, derives the sign of the deviation delta and moves the robot count by
at most one.  Once enough zero signs accumulate, learning pauses and a critic
watches the speed; it restarts learning when the speed falls under the
threshold or the dispersion drops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .stats import SpeedSeries, default_zero_eps, deviation_delta, sign_of, std_deviation


@dataclass
class ControllerConfig:
    list_limit_n: int = 20
    zero_freq_limit: int = 5
    # None means adaptive: threshold_fraction of the peak observed speed.
    speed_threshold: float | None = None
    threshold_fraction: float = 0.1
    p_min: int = 1
    p_max: int = 64
    p_init: int = 1
    # Deviation history summed by the delta; None sums everything.
    window_w: int | None = 1
    # Absolute tolerance for the zero sign; None derives it per step.
    zero_eps: float | None = None
    zero_rel_tol: float = 0.02
    # Number of recent speeds the dispersion is computed over; None = list_limit_n.
    speed_window: int | None = None
    critic_on_threshold: bool = True
    critic_on_fluctuation: bool = True

    def __post_init__(self):
        if self.list_limit_n < 1:
            raise ValueError("list_limit_n must be positive")
        if not 1 <= self.zero_freq_limit <= self.list_limit_n:
            raise ValueError("zero_freq_limit must be in [1, list_limit_n]")
        if not 1 <= self.p_min <= self.p_max:
            raise ValueError("robot bounds must satisfy 1 <= p_min <= p_max")
        if not self.p_min <= self.p_init <= self.p_max:
            raise ValueError("p_init must lie within [p_min, p_max]")
        if self.window_w is not None and self.window_w < 1:
            raise ValueError("window_w must be positive or None")
        if self.zero_eps is not None and self.zero_eps < 0:
            raise ValueError("zero_eps must be non-negative")
        if self.zero_rel_tol < 0:
            raise ValueError("zero_rel_tol must be non-negative")
        if self.speed_threshold is not None and self.speed_threshold < 0:
            raise ValueError("speed_threshold must be non-negative")
        if self.speed_window is not None and self.speed_window < 1:
            raise ValueError("speed_window must be positive")

    @classmethod
    def literal(cls, **overrides) -> "ControllerConfig":
        """Whole-list delta window with the near-exact zero test."""
        params = dict(zero_rel_tol=0.0)
        params.update(overrides)
        params.setdefault("window_w", params.get("list_limit_n", cls.list_limit_n))
        return cls(**params)

    def zero_tolerance(self, xi_history) -> float:
        if self.zero_eps is not None:
            return self.zero_eps
        recent = list(xi_history) if self.window_w is None else list(xi_history)[-self.window_w:]
        return max(default_zero_eps(recent), self.zero_rel_tol * math.fsum(recent))


@dataclass
class LearnerState:
    p_t: int
    l_ecs: list[int] = field(default_factory=list)
    l_f: int = 0
    xi_history: list[float] = field(default_factory=list)
    last_c_s: float | None = None
    last_xi: float | None = None
    peak_c_si: float = 0.0
    speeds: SpeedSeries | None = None
    steps: int = 0
    critic_resets: int = 0

    @classmethod
    def fresh(cls, cfg: ControllerConfig, p_t: int | None = None) -> "LearnerState":
        state = cls(p_t=cfg.p_init if p_t is None else p_t)
        state.speeds = SpeedSeries(maxlen=cfg.speed_window or cfg.list_limit_n)
        return state

    def threshold(self, cfg: ControllerConfig) -> float:
        if cfg.speed_threshold is not None:
            return cfg.speed_threshold
        return cfg.threshold_fraction * self.peak_c_si


@dataclass(frozen=True)
class ControllerDecision:
    p_t_old: int
    p_t_new: int
    e_cs_sign: int
    learning_active: bool
    critic_fired: bool
    c_si: float
    xi_cs: float
    e_cs: float
    paused: bool = False


def decide_threads(e_cs_sign: int, p_t: int, cfg: ControllerConfig) -> int:
    if e_cs_sign not in (-1, 0, 1):
        raise ValueError(f"sign must be -1, 0 or 1, got {e_cs_sign}")
    return min(cfg.p_max, max(cfg.p_min, p_t - e_cs_sign))


def critic_check(state: LearnerState, cfg: ControllerConfig, c_s: float, xi_current: float | None = None) -> bool:
    """True when learning should restart.

    Only meaningful while learning is paused (``l_f == 1``).
    """
    if cfg.critic_on_threshold and c_s <= state.threshold(cfg):
        return True
    if cfg.critic_on_fluctuation and state.last_xi is not None:
        if xi_current is None:
            xi_current = std_deviation(state.speeds).xi_cs if state.speeds else 0.0
        if xi_current < state.last_xi - cfg.zero_tolerance(state.xi_history):
            return True
    return False


def _trim(state: LearnerState, cfg: ControllerConfig) -> None:
    if len(state.l_ecs) > cfg.list_limit_n:
        del state.l_ecs[: len(state.l_ecs) - cfg.list_limit_n]
    keep = max(cfg.window_w or 0, 1)
    if cfg.window_w is not None and len(state.xi_history) > 4 * keep:
        del state.xi_history[: len(state.xi_history) - keep]


def learn_step(state: LearnerState, cfg: ControllerConfig, c_si: float) -> ControllerDecision:
    """Fold one speed observation into ``state`` (mutated) and decide the robot count."""
    if c_si < 0 or not math.isfinite(c_si):
        raise ValueError(f"crawl speed must be finite and non-negative, got {c_si}")
    if state.speeds is None:
        state.speeds = SpeedSeries(maxlen=cfg.speed_window or cfg.list_limit_n)
    p_old = state.p_t
    state.steps += 1
    state.peak_c_si = max(state.peak_c_si, c_si)
    state.speeds.push(c_si)
    xi = std_deviation(state.speeds).xi_cs

    paused = False
    critic_fired = False
    sign = 0
    e_cs = 0.0

    if state.l_f == 0 and state.l_ecs.count(0) >= cfg.zero_freq_limit:
        state.l_f = 1
        state.l_ecs.clear()
        paused = True
    elif state.l_f == 1 and critic_check(state, cfg, c_si, xi):
        critic_fired = True
        state.critic_resets += 1
        state.l_f = 0
        state.l_ecs.clear()
        state.xi_history.clear()
        state.last_xi = None
        state.speeds.clear()
        state.speeds.push(c_si)
        xi = 0.0

    if state.l_f == 0 and not paused:
        e_cs = deviation_delta(state.xi_history, xi, cfg.window_w)
        if not state.xi_history or c_si == 0.0:
            sign = -1
        else:
            sign = sign_of(e_cs, cfg.zero_tolerance(state.xi_history))
        state.l_ecs.append(sign)
        state.p_t = decide_threads(sign, state.p_t, cfg)

    state.xi_history.append(xi)
    state.last_xi = xi
    state.last_c_s = c_si
    _trim(state, cfg)
    return ControllerDecision(
        p_t_old=p_old,
        p_t_new=state.p_t,
        e_cs_sign=sign,
        learning_active=state.l_f == 0,
        critic_fired=critic_fired,
        c_si=c_si,
        xi_cs=xi,
        e_cs=e_cs,
        paused=paused,
    )
