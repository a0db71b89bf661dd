"""One episode of the signaling game, agent pairing, and the epsilon schedule.

An episode runs six steps: draw a state only the sender sees, let the sender
pick (or mint) a signal, note what action the sender itself would have taken
for that signal, let the receiver act on the signal alone, pay both agents the
same reward, and fold the reward back into both agents' tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from random import Random
from typing import NamedTuple, Optional

from .agent import Agent, SignalId
from .env import RewardMatrix, sample_state


@dataclass(frozen=True)
class PairingPolicy:
    """Who may interact: everyone, or only across group boundaries."""

    population: tuple[int, ...]
    groups: Optional[tuple[tuple[int, ...], ...]] = None
    cross_group_only: bool = False


def allowed_pairs(policy: PairingPolicy) -> list[tuple[int, int]]:
    """Unordered pairs the policy admits, in canonical (sorted) order."""
    members = sorted(policy.population)
    if len(members) < 2:
        raise ValueError("need at least two agents to form pairs")
    if not policy.cross_group_only:
        return [(a, b) for i, a in enumerate(members) for b in members[i + 1 :]]
    groups = [tuple(g) for g in (policy.groups or ()) if g]
    if len(groups) < 2:
        raise ValueError("cross-group pairing needs at least two non-empty groups")
    group_of = {}
    for gi, group in enumerate(groups):
        for agent_id in group:
            group_of[agent_id] = gi
    pairs = [
        (a, b)
        for i, a in enumerate(members)
        for b in members[i + 1 :]
        if a in group_of and b in group_of and group_of[a] != group_of[b]
    ]
    if not pairs:
        raise ValueError("pairing policy admits no pairs")
    return pairs


def draw_pair_and_roles(pairs: list[tuple[int, int]], rng: Random) -> tuple[int, int]:
    """Uniform pair draw then uniform role flip; exactly two decisions."""
    a, b = pairs[rng.randrange(len(pairs))]
    return (a, b) if rng.randrange(2) == 0 else (b, a)


def select_pair_and_roles(policy: PairingPolicy, rng: Random) -> tuple[int, int]:
    """(sender, receiver) drawn under the policy."""
    return draw_pair_and_roles(allowed_pairs(policy), rng)


@dataclass(frozen=True)
class EpsilonSchedule:
    """Linear decay from `start` to zero over the first `decay_episodes`."""

    start: float = 0.2
    decay_episodes: int = 5000

    def value(self, episode_index: int) -> float:
        if episode_index < 0:
            raise ValueError("episode index must be >= 0")
        if episode_index >= self.decay_episodes:
            return 0.0
        return self.start * (1.0 - episode_index / self.decay_episodes)


class EpisodeRecord(NamedTuple):
    episode_index: int
    sender: int
    receiver: int
    state: int
    signal: SignalId
    minted: bool
    action: int
    reward: float
    intent: Optional[int]
    intent_met: bool


def play_episode(
    env: RewardMatrix,
    sender: Agent,
    receiver: Agent,
    epsilon: float,
    rng: Random,
    episode_index: int = 0,
) -> EpisodeRecord:
    """Run one full interaction and apply both agents' updates."""
    state = sample_state(rng, env.num_states)
    signal, minted = sender.select_signal(state, epsilon, rng)
    intent = sender.intended_action(signal)
    action = receiver.select_action(signal, epsilon, rng)
    reward = env.cells[state][action]
    sender.update_sender(signal, state, reward)
    receiver.update_receiver(signal, action, reward)
    sender.note_participation(signal)
    receiver.note_participation(signal)
    return EpisodeRecord(
        episode_index=episode_index,
        sender=sender.agent_id,
        receiver=receiver.agent_id,
        state=state,
        signal=signal,
        minted=minted,
        action=action,
        reward=reward,
        intent=intent,
        intent_met=intent is not None and intent == action,
    )
