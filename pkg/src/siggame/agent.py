"""Tabular agents: role-indexed signal utilities, selection policies, learning.

Signals are (creator, serial) pairs, so identifiers minted by different agents
never collide.  Each agent keeps two utility tables: accumulated reward per
state for signals it has sent, and per action for signals it has received.
Selection is softmax over utilities with an epsilon share spread uniformly
across the options.

A signal with no sender-side evidence yet (known only from the receiver role)
is eligible for sending in any state; this is how signals minted by one agent
spread through the population.  Once an agent has sender-side evidence for a
signal, it only sends it for the state the evidence strictly favours.
"""

from __future__ import annotations

import math
from random import Random
from typing import Iterable, Optional, Sequence

SignalId = tuple[int, int]  # (creator agent id, per-creator serial)

STALENESS_LIMIT = 20  # participated episodes a stored signal may go unused


def softmax_with_epsilon(values: Sequence[float], epsilon: float) -> list[float]:
    """Softmax selection probabilities with an epsilon mass spread uniformly.

    p_i = (1 - epsilon) * softmax(values)_i + epsilon / len(values)
    """
    if len(values) == 0:
        raise ValueError("cannot build selection probabilities over no options")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    top = max(values)
    exps = [math.exp(v - top) for v in values]
    total = sum(exps)
    uniform = epsilon / len(values)
    scale = (1.0 - epsilon) / total
    return [e * scale + uniform for e in exps]


def sample_index(rng: Random, probs: Sequence[float]) -> int:
    """Inverse-CDF draw; consumes one decision from the stream."""
    r = rng.random()
    acc = 0.0
    for i, p in enumerate(probs):
        acc += p
        if r < acc:
            return i
    return len(probs) - 1


def unique_argmax(values: Sequence[float]) -> Optional[int]:
    """Index of the strict maximum, or None on a tie."""
    best = values[0]
    best_i = 0
    tied = False
    for i in range(1, len(values)):
        v = values[i]
        if v > best:
            best = v
            best_i = i
            tied = False
        elif v == best:
            tied = True
    return None if tied else best_i


class Agent:
    """One agent's mutable state.  Single-owner: never mutated concurrently."""

    __slots__ = (
        "agent_id",
        "num_states",
        "num_actions",
        "sender_table",
        "receiver_table",
        "last_used",
        "participation_count",
        "mint_serial",
    )

    def __init__(self, agent_id: int, num_states: int, num_actions: int):
        self.agent_id = agent_id
        self.num_states = num_states
        self.num_actions = num_actions
        self.sender_table: dict[SignalId, list[float]] = {}
        self.receiver_table: dict[SignalId, list[float]] = {}
        self.last_used: dict[SignalId, int] = {}
        self.participation_count = 0
        self.mint_serial = 0

    # -- signal selection (sender role) --------------------------------------

    def candidate_signals(self, state: int) -> list[SignalId]:
        """Signals eligible for the observed state, in canonical order.

        A signal with sender-side evidence qualifies only if its utility for
        `state` strictly exceeds its utility for every other state; ties
        disqualify it.  When no stored signal qualifies, signals known from
        the receiver role but never yet tried as sender become eligible (this
        is how one agent's coinage spreads through the population).  An empty
        result makes the caller mint a fresh signal.
        """
        candidates: list[SignalId] = []
        for c, vec in self.sender_table.items():
            u = vec[state]
            on_top = True
            for s, v in enumerate(vec):
                if s != state and v >= u:
                    on_top = False
                    break
            if on_top:
                candidates.append(c)
        if not candidates:
            candidates = [c for c in self.receiver_table if c not in self.sender_table]
        candidates.sort()
        return candidates

    def select_signal(self, state: int, epsilon: float, rng: Random) -> tuple[SignalId, bool]:
        """Pick the signal to communicate; mints a fresh one when nothing fits.

        Returns (signal, minted).  Ensures the chosen signal has a sender-table
        row so the end-of-episode update always has a cell to touch.
        """
        candidates = self.candidate_signals(state)
        if not candidates:
            signal = (self.agent_id, self.mint_serial)
            self.mint_serial += 1
            self.sender_table[signal] = [0.0] * self.num_states
            self.last_used.setdefault(signal, self.participation_count)
            return signal, True
        table = self.sender_table
        utilities = [table[c][state] if c in table else 0.0 for c in candidates]
        probs = softmax_with_epsilon(utilities, epsilon)
        signal = candidates[sample_index(rng, probs)]
        if signal not in table:
            table[signal] = [0.0] * self.num_states
        return signal, False

    # -- action selection (receiver role) ------------------------------------

    def select_action(self, signal: SignalId, epsilon: float, rng: Random) -> int:
        """Pick an action for the received signal; unknown signals start at zero."""
        vec = self.receiver_table.get(signal)
        if vec is None:
            vec = [0.0] * self.num_actions
            self.receiver_table[signal] = vec
            self.last_used.setdefault(signal, self.participation_count)
        probs = softmax_with_epsilon(vec, epsilon)
        return sample_index(rng, probs)

    # -- learning -------------------------------------------------------------

    def update_sender(self, signal: SignalId, state: int, reward: float) -> None:
        self.sender_table[signal][state] += reward

    def update_receiver(self, signal: SignalId, action: int, reward: float) -> None:
        self.receiver_table[signal][action] += reward

    def note_participation(self, signal: SignalId) -> set[SignalId]:
        """Mark the episode's signal as used and drop stale vocabulary.

        Called once per episode the agent takes part in, after the updates.
        Signals unused for more than STALENESS_LIMIT participated episodes are
        removed from both tables.  Returns the purged set.
        """
        self.participation_count += 1
        now = self.participation_count
        self.last_used[signal] = now
        purged = [c for c, last in self.last_used.items() if now - last > STALENESS_LIMIT]
        for c in purged:
            self.sender_table.pop(c, None)
            self.receiver_table.pop(c, None)
            del self.last_used[c]
        return set(purged)

    # -- read-only views -------------------------------------------------------

    def sender_interpretation(self, signal: SignalId) -> Optional[int]:
        """State this agent most associates with the signal, None on tie/unknown."""
        vec = self.sender_table.get(signal)
        return None if vec is None else unique_argmax(vec)

    def receiver_interpretation(self, signal: SignalId) -> Optional[int]:
        """Action this agent most associates with the signal, None on tie/unknown."""
        vec = self.receiver_table.get(signal)
        return None if vec is None else unique_argmax(vec)

    def intended_action(self, signal: SignalId) -> Optional[int]:
        """Greedy action the agent would take for its own signal as a receiver.

        Evaluated on the current tables, so callers must ask before applying
        the episode's updates.
        """
        return self.receiver_interpretation(signal)

    def vocabulary(self) -> set[SignalId]:
        return set(self.sender_table) | set(self.receiver_table)


def fresh_population(count: int, num_states: int, num_actions: int, start_id: int = 0) -> list[Agent]:
    return [Agent(start_id + i, num_states, num_actions) for i in range(count)]
