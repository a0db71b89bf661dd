"""Two-phase experiment protocol: seeded repetitions, batches, aggregation.

A repetition runs a convergence phase, applies one intervention (a naive agent
joins, or pairing restrictions are lifted), then runs a robustness test phase.
Every repetition draws its own random stream from (master_seed, rep_index), so
batches can be executed on any number of workers and still merge to identical
output.
"""

from __future__ import annotations

import hashlib
import os
from collections import Counter, deque
from dataclasses import dataclass, field, replace
from multiprocessing import Pool
from random import Random
from statistics import fmean, pstdev
from typing import Optional, Sequence

from .agent import Agent, fresh_population
from .env import RewardMatrix, enumerate_reward_functions, explicit_reward, sample_reward_function
from .game import (
    EpisodeRecord,
    EpsilonSchedule,
    PairingPolicy,
    allowed_pairs,
    draw_pair_and_roles,
    play_episode,
)
from .metrics import (
    WindowAccumulator,
    alignment,
    classify_run,
    mean_vocabulary,
    snapshot_population,
)

POPULATION_INCREASE = "population_increase"
UNGROUP = "ungroup"
NO_INTERVENTION = "none"

INTERVENTIONS = (POPULATION_INCREASE, UNGROUP, NO_INTERVENTION)
RESET_POLICIES = ("per_phase", "global")

DEFAULT_CHECKPOINTS = (100, 500, 5000, 10000)


class ConfigError(ValueError):
    """Raised when an experiment configuration violates its invariants."""


# --------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class EnvironmentSpec:
    """Reward family: a symbolic name or explicit matrices."""

    family: Optional[str] = "symmetric_2x2"
    matrices: Optional[tuple[RewardMatrix, ...]] = None

    def resolve(self) -> tuple[RewardMatrix, ...]:
        if self.matrices is not None:
            if not self.matrices:
                raise ConfigError("explicit reward family is empty")
            return self.matrices
        if self.family == "symmetric_2x2":
            return tuple(enumerate_reward_functions(2, 2))
        if self.family == "symmetric_3x3":
            return tuple(enumerate_reward_functions(3, 3))
        raise ConfigError(f"unknown reward family {self.family!r}")


@dataclass(frozen=True)
class PhaseOneSpec:
    num_agents: int
    episodes: int = 10000
    groups: Optional[tuple[tuple[int, ...], ...]] = None


@dataclass(frozen=True)
class PhaseTwoSpec:
    episodes: int = 10000


@dataclass(frozen=True)
class EpsilonSpec:
    start: float = 0.2
    decay_episodes: int = 5000
    reset: str = "per_phase"  # restart the decay for phase 2, or keep a global clock


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    phase1: PhaseOneSpec
    intervention: str
    phase2: PhaseTwoSpec = PhaseTwoSpec()
    environment: EnvironmentSpec = EnvironmentSpec()
    epsilon: EpsilonSpec = EpsilonSpec()
    checkpoints: tuple[int, ...] = DEFAULT_CHECKPOINTS
    repetitions: int = 1000
    master_seed: int = 0


def validate_config(config: ExperimentConfig) -> list[str]:
    """All invariant violations, empty when the config is runnable."""
    problems = []
    p1 = config.phase1
    if p1.num_agents < 2:
        problems.append("phase1.num_agents must be >= 2")
    if p1.episodes < 1:
        problems.append("phase1.episodes must be >= 1")
    if config.phase2.episodes < 1:
        problems.append("phase2.episodes must be >= 1")
    if config.repetitions < 1:
        problems.append("repetitions must be >= 1")
    if not config.checkpoints:
        problems.append("checkpoints must not be empty")
    else:
        top = max(config.checkpoints)
        if min(config.checkpoints) < 1:
            problems.append("checkpoints must be >= 1")
        if top > p1.episodes or top > config.phase2.episodes:
            problems.append(
                f"largest checkpoint {top} exceeds a phase length "
                f"({p1.episodes} / {config.phase2.episodes})"
            )
    if config.intervention not in INTERVENTIONS:
        problems.append(f"intervention must be one of {INTERVENTIONS}")
    if config.intervention == UNGROUP and p1.groups is None:
        problems.append("ungroup intervention needs phase1 groups")
    if p1.groups is not None:
        population = set(range(p1.num_agents))
        seen: set[int] = set()
        nonempty = 0
        for group in p1.groups:
            if group:
                nonempty += 1
            for agent_id in group:
                if agent_id not in population:
                    problems.append(f"group member {agent_id} outside the population")
                if agent_id in seen:
                    problems.append(f"agent {agent_id} appears in more than one group")
                seen.add(agent_id)
        if nonempty < 2:
            problems.append("grouped phase 1 needs at least two non-empty groups")
        if seen != population:
            missing = sorted(population - seen)
            problems.append(f"agents {missing} belong to no group and could never interact")
    eps = config.epsilon
    if not 0.0 <= eps.start <= 1.0:
        problems.append("epsilon.start must lie in [0, 1]")
    if eps.decay_episodes < 0:
        problems.append("epsilon.decay_episodes must be >= 0")
    if eps.reset not in RESET_POLICIES:
        problems.append(f"epsilon.reset must be one of {RESET_POLICIES}")
    try:
        family = config.environment.resolve()
    except ConfigError as exc:
        problems.append(str(exc))
        family = ()
    if family:
        ns, na = family[0].num_states, family[0].num_actions
        for matrix in family:
            if (matrix.num_states, matrix.num_actions) != (ns, na):
                problems.append(f"matrix {matrix.tag} disagrees on dimensions")
            problems.extend(matrix.violations())
    return problems


# --------------------------------------------------------------------------
# seeding


def derive_rng(master_seed: int, rep_index: int) -> Random:
    """Independent, platform-stable stream for one repetition."""
    digest = hashlib.sha256(f"siggame:{master_seed}:{rep_index}".encode()).digest()
    return Random(int.from_bytes(digest, "big"))


# --------------------------------------------------------------------------
# per-repetition results


@dataclass(frozen=True)
class Checkpoint:
    phase: int
    episode: int  # within the phase, 1-based
    reward: float
    vocabulary: float
    alignment: float
    intent_met: float
    suc_mis: float
    success: float  # positive-reward fraction of the window
    group_alignment: Optional[float] = None


@dataclass(frozen=True)
class RunTrace:
    rep_index: int
    matrix_tag: str
    checkpoints: tuple[Checkpoint, ...]
    phase1_label: str
    phase2_label: str
    episodes: Optional[tuple[EpisodeRecord, ...]] = None

    def phase_end(self, phase: int) -> Checkpoint:
        rows = [c for c in self.checkpoints if c.phase == phase]
        return rows[-1]


def _capture_flags(episodes: int, checkpoints: Sequence[int]) -> list[bool]:
    flags = [False] * (episodes + 1)
    for cp in checkpoints:
        for e in range(max(1, cp - 99), cp + 1):
            flags[e] = True
    return flags


def _run_phase(
    agents: list[Agent],
    pairs: list[tuple[int, int]],
    env: RewardMatrix,
    schedule: EpsilonSchedule,
    schedule_offset: int,
    episodes: int,
    checkpoints: Sequence[int],
    rng: Random,
    phase: int,
    episode_offset: int,
    groups: Optional[tuple[tuple[int, ...], ...]],
    trace: Optional[list[EpisodeRecord]],
) -> list[Checkpoint]:
    window = WindowAccumulator()
    capture = _capture_flags(episodes, checkpoints)
    vocab_win: deque[float] = deque(maxlen=100)
    align_win: deque[float] = deque(maxlen=100)
    group_win: deque[float] = deque(maxlen=100)
    checkpoint_set = set(checkpoints)
    scored_groups = None
    if groups is not None:
        scored_groups = [g for g in groups if len(g) >= 2]
    rows = []
    for e in range(1, episodes + 1):
        eps = schedule.value(schedule_offset + e - 1)
        sender_id, receiver_id = draw_pair_and_roles(pairs, rng)
        record = play_episode(
            env, agents[sender_id], agents[receiver_id], eps, rng, episode_offset + e
        )
        window.push(record.reward, record.intent_met)
        if trace is not None:
            trace.append(record)
        if capture[e]:
            snap = snapshot_population(agents)
            vocab_win.append(mean_vocabulary(snap))
            align_win.append(alignment(snap))
            if scored_groups:
                group_win.append(fmean(alignment(snap, subset=g) for g in scored_groups))
            if e in checkpoint_set:
                w = min(100, e)
                rows.append(
                    Checkpoint(
                        phase=phase,
                        episode=e,
                        reward=window.reward_mean(),
                        vocabulary=fmean(list(vocab_win)[-w:]),
                        alignment=fmean(list(align_win)[-w:]),
                        intent_met=window.intent_met_ratio(),
                        suc_mis=window.suc_mis_ratio(),
                        success=window.success_ratio(),
                        group_alignment=(
                            fmean(list(group_win)[-w:]) if scored_groups else None
                        ),
                    )
                )
    return rows


def run_repetition(
    config: ExperimentConfig, rep_index: int, collect_trace: bool = False
) -> RunTrace:
    """One full two-phase run under the repetition's own random stream."""
    rng = derive_rng(config.master_seed, rep_index)
    family = config.environment.resolve()
    env = sample_reward_function(rng, family)
    agents = fresh_population(config.phase1.num_agents, env.num_states, env.num_actions)
    groups = config.phase1.groups
    policy1 = PairingPolicy(
        population=tuple(range(len(agents))),
        groups=groups,
        cross_group_only=groups is not None,
    )
    schedule = EpsilonSchedule(config.epsilon.start, config.epsilon.decay_episodes)
    trace: Optional[list[EpisodeRecord]] = [] if collect_trace else None

    cps1 = _effective_checkpoints(config.checkpoints, config.phase1.episodes)
    rows = _run_phase(
        agents, allowed_pairs(policy1), env, schedule, 0, config.phase1.episodes,
        cps1, rng, 1, 0, groups, trace,
    )

    if config.intervention == POPULATION_INCREASE:
        agents.append(Agent(len(agents), env.num_states, env.num_actions))
    policy2 = PairingPolicy(population=tuple(range(len(agents))))

    offset = 0 if config.epsilon.reset == "per_phase" else config.phase1.episodes
    cps2 = _effective_checkpoints(config.checkpoints, config.phase2.episodes)
    rows += _run_phase(
        agents, allowed_pairs(policy2), env, schedule, offset, config.phase2.episodes,
        cps2, rng, 2, config.phase1.episodes, groups, trace,
    )

    end1 = [c for c in rows if c.phase == 1][-1]
    end2 = [c for c in rows if c.phase == 2][-1]
    return RunTrace(
        rep_index=rep_index,
        matrix_tag=env.tag,
        checkpoints=tuple(rows),
        phase1_label=classify_run(end1.reward, end1.intent_met),
        phase2_label=classify_run(end2.reward, end2.intent_met),
        episodes=tuple(trace) if trace is not None else None,
    )


def _effective_checkpoints(checkpoints: Sequence[int], episodes: int) -> list[int]:
    """Configured checkpoints plus the phase end, which labels always need."""
    return sorted(set(checkpoints) | {episodes})


# --------------------------------------------------------------------------
# batches


@dataclass(frozen=True)
class CheckpointStats:
    phase: int
    episode: int
    means: dict[str, float]
    sds: dict[str, float]


@dataclass(frozen=True)
class BatchSummary:
    config: ExperimentConfig
    runs: tuple[RunTrace, ...]
    checkpoint_stats: tuple[CheckpointStats, ...]
    histograms: dict[tuple[int, str], list[int]]
    label_counts: dict[tuple[int, str], int]
    crosstab: dict[tuple[str, str], int]


METRIC_FIELDS = ("reward", "vocabulary", "alignment", "intent_met", "suc_mis")
HISTOGRAM_METRICS = ("success", "intent_met", "suc_mis")


def _rep_worker(args: tuple[ExperimentConfig, int]) -> RunTrace:
    config, rep_index = args
    return run_repetition(config, rep_index)


def run_batch(config: ExperimentConfig, workers: Optional[int] = None) -> BatchSummary:
    """Run all repetitions and aggregate; output is independent of workers."""
    problems = validate_config(config)
    if problems:
        raise ConfigError("; ".join(problems))
    reps = config.repetitions
    if workers is None or workers < 1:
        workers = os.cpu_count() or 1
    workers = min(workers, reps)
    if workers == 1:
        runs = [run_repetition(config, i) for i in range(reps)]
    else:
        chunk = max(1, reps // (workers * 8))
        with Pool(workers) as pool:
            runs = list(pool.imap(_rep_worker, ((config, i) for i in range(reps)), chunk))
    return summarize_runs(config, runs)


def summarize_runs(config: ExperimentConfig, runs: Sequence[RunTrace]) -> BatchSummary:
    grouped = config.phase1.groups is not None
    stats = []
    for idx, head in enumerate(runs[0].checkpoints):
        column = [run.checkpoints[idx] for run in runs]
        means = {}
        sds = {}
        for name in METRIC_FIELDS:
            values = [getattr(c, name) for c in column]
            means[name] = fmean(values)
            sds[name] = pstdev(values)
        if grouped:
            values = [c.group_alignment for c in column]
            means["group_alignment"] = fmean(values)
            sds["group_alignment"] = pstdev(values)
        stats.append(CheckpointStats(head.phase, head.episode, means, sds))

    from .metrics import histogram  # local import keeps module load light

    histograms = {}
    label_counts: Counter = Counter()
    for phase in (1, 2):
        ends = [run.phase_end(phase) for run in runs]
        for metric in HISTOGRAM_METRICS:
            histograms[(phase, metric)] = histogram([getattr(c, metric) for c in ends])
    for run in runs:
        label_counts[(1, run.phase1_label)] += 1
        label_counts[(2, run.phase2_label)] += 1
    return BatchSummary(
        config=config,
        runs=tuple(runs),
        checkpoint_stats=tuple(stats),
        histograms=histograms,
        label_counts=dict(label_counts),
        crosstab=persistence_crosstab(runs),
    )


def persistence_crosstab(runs: Sequence[RunTrace]) -> dict[tuple[str, str], int]:
    """Counts of phase-1 label x phase-2 label across repetitions."""
    table: Counter = Counter()
    for run in runs:
        table[(run.phase1_label, run.phase2_label)] += 1
    return dict(table)


# --------------------------------------------------------------------------
# bundled presets

DEFAULT_ASYMMETRIC = (
    explicit_reward(((1, -1), (-3, 1)), "A1"),
    explicit_reward(((-1, 1), (1, -3)), "A2"),
)


def _preset(name, num_agents, intervention, groups=None, environment=EnvironmentSpec(), seed=0):
    return ExperimentConfig(
        name=name,
        phase1=PhaseOneSpec(num_agents=num_agents, groups=groups),
        intervention=intervention,
        environment=environment,
        master_seed=seed,
    )


PRESETS: dict[str, ExperimentConfig] = {
    "exp1_2agents": _preset("2 Agents", 2, POPULATION_INCREASE, seed=101),
    "exp2_3unrestricted": _preset("3 Unrestricted", 3, POPULATION_INCREASE, seed=202),
    "exp3_3restricted": _preset(
        "3 Restricted", 3, UNGROUP, groups=((0, 1), (2,)), seed=303
    ),
    "exp3b_4restricted": _preset(
        "4 Restricted", 4, UNGROUP, groups=((0, 1), (2, 3)), seed=404
    ),
    "val_3x3": _preset(
        "3 Unrestricted 3x3", 3, POPULATION_INCREASE,
        environment=EnvironmentSpec(family="symmetric_3x3"), seed=505,
    ),
    "val_asymmetric": _preset(
        "3 Unrestricted Asymmetric", 3, POPULATION_INCREASE,
        environment=EnvironmentSpec(family=None, matrices=DEFAULT_ASYMMETRIC), seed=606,
    ),
}
