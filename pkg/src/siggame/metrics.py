"""The five evaluation metrics over 100-episode moving windows.

Reward, intent-met, and successful-misunderstanding ratios come from the
per-episode stream; vocabulary size and interpretation alignment come from
population snapshots taken after each episode.  Checkpoints report the mean of
each metric over the trailing window.
"""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .agent import Agent, SignalId

WINDOW_CAPACITY = 100

ALIGNED = "aligned"
SUCCESSFUL_MISUNDERSTANDING = "successful_misunderstanding"
UNCONVERGED = "unconverged"


class WindowAccumulator:
    """Ring of the most recent (reward, intent_met) episode samples."""

    __slots__ = ("samples",)

    def __init__(self, capacity: int = WINDOW_CAPACITY):
        self.samples: deque[tuple[float, bool]] = deque(maxlen=capacity)

    def push(self, reward: float, intent_met: bool) -> None:
        self.samples.append((reward, intent_met))

    def __len__(self) -> int:
        return len(self.samples)

    def _require_samples(self) -> None:
        if not self.samples:
            raise ValueError("window holds no samples yet")

    def reward_mean(self) -> float:
        self._require_samples()
        return sum(r for r, _ in self.samples) / len(self.samples)

    def intent_met_ratio(self) -> float:
        self._require_samples()
        return sum(1 for _, met in self.samples if met) / len(self.samples)

    def success_ratio(self) -> float:
        """Fraction of window episodes with positive reward."""
        self._require_samples()
        return sum(1 for r, _ in self.samples if r > 0) / len(self.samples)

    def suc_mis_ratio(self) -> float:
        """Fraction of window episodes rewarded despite an unmet intent."""
        self._require_samples()
        return sum(1 for r, met in self.samples if r > 0 and not met) / len(self.samples)


def windowed_reward(acc: WindowAccumulator) -> float:
    return acc.reward_mean()


def intent_met_ratio(acc: WindowAccumulator) -> float:
    return acc.intent_met_ratio()


def successful_misunderstanding_ratio(acc: WindowAccumulator) -> float:
    return acc.suc_mis_ratio()


@dataclass(frozen=True)
class PopulationSnapshot:
    """Read-only view of every agent's vocabulary and interpretations."""

    agent_ids: tuple[int, ...]
    vocab_sizes: tuple[int, ...]
    sender_interps: tuple[dict[SignalId, int], ...]
    receiver_interps: tuple[dict[SignalId, int], ...]


def snapshot_population(agents: Sequence[Agent]) -> PopulationSnapshot:
    vocab_sizes = []
    sender_maps = []
    receiver_maps = []
    for agent in agents:
        vocab_sizes.append(len(agent.vocabulary()))
        sender_maps.append(
            {c: s for c, vec in agent.sender_table.items() if (s := _argmax(vec)) is not None}
        )
        receiver_maps.append(
            {c: a for c, vec in agent.receiver_table.items() if (a := _argmax(vec)) is not None}
        )
    return PopulationSnapshot(
        agent_ids=tuple(agent.agent_id for agent in agents),
        vocab_sizes=tuple(vocab_sizes),
        sender_interps=tuple(sender_maps),
        receiver_interps=tuple(receiver_maps),
    )


def _argmax(vec: Sequence[float]) -> Optional[int]:
    best = vec[0]
    best_i = 0
    tied = False
    for i in range(1, len(vec)):
        if vec[i] > best:
            best, best_i, tied = vec[i], i, False
        elif vec[i] == best:
            tied = True
    return None if tied else best_i


def mean_vocabulary(pop: PopulationSnapshot) -> float:
    if not pop.vocab_sizes:
        raise ValueError("population is empty")
    return sum(pop.vocab_sizes) / len(pop.vocab_sizes)


def alignment(pop: PopulationSnapshot, subset: Optional[Iterable[int]] = None) -> float:
    """Mean share of agents backing the dominant reading per signal and role.

    Each (signal, role) combination interpreted by at least two agents scores
    (majority - 1) / (n - 1), where n is the population (or subset) size and
    majority counts the largest set of agents sharing one interpretation.
    Returns 1.0 when no combination qualifies.
    """
    if subset is None:
        indices = range(len(pop.agent_ids))
    else:
        wanted = set(subset)
        indices = [i for i, aid in enumerate(pop.agent_ids) if aid in wanted]
    n = len(indices) if subset is not None else len(pop.agent_ids)
    if n < 2:
        raise ValueError("alignment needs at least two agents")
    denom = n - 1
    total = 0.0
    combos = 0
    for maps in (pop.sender_interps, pop.receiver_interps):
        votes: dict[SignalId, Counter] = {}
        for i in indices:
            for signal, meaning in maps[i].items():
                counter = votes.get(signal)
                if counter is None:
                    counter = votes[signal] = Counter()
                counter[meaning] += 1
        for counter in votes.values():
            holders = sum(counter.values())
            if holders >= 2:
                total += (max(counter.values()) - 1) / denom
                combos += 1
    return total / combos if combos else 1.0


def group_alignment(pop: PopulationSnapshot, subset: Iterable[int]) -> float:
    """Alignment scored as if the subset were the whole population."""
    members = tuple(subset)
    if len(members) < 2:
        raise ValueError("group alignment needs a subset of at least two agents")
    return alignment(pop, subset=members)


def classify_run(reward_mean: float, intent_ratio: float) -> str:
    """Label a phase-end window: aligned, successful misunderstanding, or neither."""
    if reward_mean >= 0.9 and intent_ratio >= 0.9:
        return ALIGNED
    if reward_mean >= 0.9 and intent_ratio <= 0.1:
        return SUCCESSFUL_MISUNDERSTANDING
    return UNCONVERGED


def histogram(values: Iterable[float], bins: int = 10) -> list[int]:
    """Fixed-bin counts over [0, 1]; boundary values fall into the lower bin."""
    counts = [0] * bins
    for v in values:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"histogram value {v} outside [0, 1]")
        if v == 0.0:
            counts[0] += 1
        else:
            counts[min(math.ceil(v * bins) - 1, bins - 1)] += 1
    return counts


def histogram_edges(bins: int = 10) -> list[tuple[float, float]]:
    return [(i / bins, (i + 1) / bins) for i in range(bins)]
