"""Environments: state/action spaces and permutation-structured reward functions.

An environment is a dense reward table over (state, action) in which every
state has exactly one rewarded action.  States and actions are plain integer
indices; reward matrices are immutable and safe to share between runs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from random import Random
from typing import Sequence


@dataclass(frozen=True)
class RewardMatrix:
    """Reward table with one strictly positive cell per state row."""

    num_states: int
    num_actions: int
    cells: tuple[tuple[float, ...], ...]
    tag: str

    def reward(self, state: int, action: int) -> float:
        return self.cells[state][action]

    def positive_action(self, state: int) -> int:
        """The single rewarded action for a state."""
        for action, value in enumerate(self.cells[state]):
            if value > 0:
                return action
        raise ValueError(f"no positive cell in row {state} of {self.tag}")

    def violations(self) -> list[str]:
        """Structural problems, empty when the matrix is well formed."""
        problems = []
        if len(self.cells) != self.num_states:
            problems.append(f"{self.tag}: expected {self.num_states} rows, got {len(self.cells)}")
            return problems
        for s, row in enumerate(self.cells):
            if len(row) != self.num_actions:
                problems.append(f"{self.tag}: row {s} has {len(row)} cells, expected {self.num_actions}")
                continue
            positives = sum(1 for v in row if v > 0)
            negatives = sum(1 for v in row if v < 0)
            if positives != 1 or negatives != self.num_actions - 1:
                problems.append(
                    f"{self.tag}: row {s} must hold exactly one positive cell and "
                    f"negative cells elsewhere, got {row}"
                )
        return problems


def make_permutation_reward(
    num_states: int,
    num_actions: int,
    sigma: Sequence[int],
    pos: float = 1.0,
    neg: float = -1.0,
    tag: str | None = None,
) -> RewardMatrix:
    """Build the matrix that pays `pos` at (s, sigma[s]) and `neg` elsewhere."""
    if num_states != num_actions:
        raise ValueError("permutation rewards need num_states == num_actions")
    if sorted(sigma) != list(range(num_states)):
        raise ValueError(f"sigma {tuple(sigma)} is not a permutation of range({num_states})")
    if pos <= 0:
        raise ValueError(f"pos must be strictly positive, got {pos}")
    if neg >= 0:
        raise ValueError(f"neg must be strictly negative, got {neg}")
    cells = tuple(
        tuple(pos if a == sigma[s] else neg for a in range(num_actions))
        for s in range(num_states)
    )
    if tag is None:
        tag = "perm" + "".join(str(a) for a in sigma)
    return RewardMatrix(num_states, num_actions, cells, tag)


def enumerate_reward_functions(
    num_states: int,
    num_actions: int,
    pos: float = 1.0,
    neg: float = -1.0,
) -> list[RewardMatrix]:
    """All permutation rewards for the given square space, in lexicographic order.

    The 2x2 family keeps the conventional names R1 (identity) and R2 (swap).
    """
    if num_states != num_actions:
        raise ValueError("symmetric families need num_states == num_actions")
    matrices = []
    for i, sigma in enumerate(itertools.permutations(range(num_states))):
        tag = f"R{i + 1}" if num_states == 2 else None
        matrices.append(make_permutation_reward(num_states, num_actions, sigma, pos, neg, tag))
    return matrices


def explicit_reward(rows: Sequence[Sequence[float]], tag: str) -> RewardMatrix:
    """Wrap a user-supplied dense table, enforcing the one-positive-per-row shape."""
    cells = tuple(tuple(float(v) for v in row) for row in rows)
    if not cells or not cells[0]:
        raise ValueError("reward matrix needs at least one state and one action")
    matrix = RewardMatrix(len(cells), len(cells[0]), cells, tag)
    problems = matrix.violations()
    if problems:
        raise ValueError("; ".join(problems))
    return matrix


def sample_reward_function(rng: Random, family: Sequence[RewardMatrix]) -> RewardMatrix:
    """Uniform draw from a family; consumes one decision from the stream."""
    if not family:
        raise ValueError("reward family is empty")
    return family[rng.randrange(len(family))]


def sample_state(rng: Random, num_states: int) -> int:
    """Uniform state draw; consumes one decision from the stream."""
    if num_states < 1:
        raise ValueError("num_states must be >= 1")
    return rng.randrange(num_states)
