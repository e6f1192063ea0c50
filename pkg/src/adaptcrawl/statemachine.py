"""Four-state speed/relevance machine and its halting formula.

States carry the pair (speed_ok, relevance_ok).  The halting formula holds in
S0 and S1 only, so a graph is abandoned once it reaches S2 or S3.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass


class StateId(enum.Enum):
    S0 = 0
    S1 = 1
    S2 = 2
    S3 = 3


# (speed_ok, relevance_ok) per state. Swap S1/S2 here to flip the labelling.
LITERALS: dict[StateId, tuple[bool, bool]] = {
    StateId.S0: (True, True),
    StateId.S1: (True, False),
    StateId.S2: (False, True),
    StateId.S3: (False, False),
}

ADJACENCY: dict[StateId, tuple[StateId, ...]] = {
    StateId.S0: (StateId.S0, StateId.S1),
    StateId.S1: (StateId.S0, StateId.S2),
    StateId.S2: (StateId.S1, StateId.S3),
    StateId.S3: (StateId.S3,),
}

# Truth of H per state, as enumerated for the transition diagram.
_H = {StateId.S0: True, StateId.S1: True, StateId.S2: False, StateId.S3: False}


@dataclass(frozen=True)
class Observation:
    speed_ok: bool
    relevance_ok: bool


@dataclass(frozen=True)
class CrawlState:
    id: StateId = StateId.S0

    @property
    def speed_ok(self) -> bool:
        return LITERALS[self.id][0]

    @property
    def relevance_ok(self) -> bool:
        return LITERALS[self.id][1]

    def __str__(self) -> str:
        return self.id.name


def state_for(obs: Observation) -> StateId:
    key = (obs.speed_ok, obs.relevance_ok)
    for sid, lit in LITERALS.items():
        if lit == key:
            return sid
    raise AssertionError(key)


def _distance(src: StateId, dst: StateId) -> float:
    if src == dst:
        return 0
    seen = {src}
    queue = deque([(src, 0)])
    while queue:
        node, d = queue.popleft()
        for nxt in ADJACENCY[node]:
            if nxt == dst:
                return d + 1
            if nxt not in seen:
                seen.add(nxt)
                queue.append((nxt, d + 1))
    return float("inf")


def _hamming(a: StateId, b: StateId) -> int:
    return sum(x != y for x, y in zip(LITERALS[a], LITERALS[b]))


def evaluate_H(state: CrawlState) -> bool:
    return _H[state.id]


def should_halt(state: CrawlState) -> bool:
    return not evaluate_H(state)


def transition(state: CrawlState, obs: Observation) -> CrawlState:
    """Move to the observed state if adjacent, else one step toward it.

    Among the adjacent states, the one closest to the target wins; ties go to
    the state whose literals agree most with the observation, then to the
    lower index.
    """
    target = state_for(obs)
    neighbours = ADJACENCY[state.id]
    if target in neighbours:
        return CrawlState(target)
    best = min(neighbours, key=lambda s: (_distance(s, target), _hamming(s, target), s.value))
    return CrawlState(best)
