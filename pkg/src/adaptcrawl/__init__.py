"""Adaptive focused web crawler with a self-tuning robot count."""

from .controller import ControllerConfig, ControllerDecision, LearnerState, decide_threads, learn_step
from .crawlcore import CrawlSession, Frontier, GraphConfig, IntelligentWebMiner, run_session
from .relevance import Topic, classify, cosine, term_vector
from .scheduler import CrawlLogEntry, MemoryStores, Scheduler, Stores
from .statemachine import CrawlState, Observation, StateId, evaluate_H, should_halt, transition
from .stats import SpeedSeries, crawl_speed, deviation_delta, mean_speed, sign_of, std_deviation

__version__ = "0.1.0"

__all__ = [
    "ControllerConfig", "ControllerDecision", "LearnerState", "decide_threads", "learn_step",
    "CrawlSession", "Frontier", "GraphConfig", "IntelligentWebMiner", "run_session",
    "Topic", "classify", "cosine", "term_vector",
    "CrawlLogEntry", "MemoryStores", "Scheduler", "Stores",
    "CrawlState", "Observation", "StateId", "evaluate_H", "should_halt", "transition",
    "SpeedSeries", "crawl_speed", "deviation_delta", "mean_speed", "sign_of", "std_deviation",
]
