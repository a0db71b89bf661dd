"""Deterministic simulator of Lewis signaling games over separate environments."""

from .agent import Agent, SignalId, softmax_with_epsilon
from .env import (
    RewardMatrix,
    enumerate_reward_functions,
    explicit_reward,
    make_permutation_reward,
    sample_reward_function,
    sample_state,
)
from .experiment import (
    BatchSummary,
    ConfigError,
    EnvironmentSpec,
    EpsilonSpec,
    ExperimentConfig,
    PhaseOneSpec,
    PhaseTwoSpec,
    PRESETS,
    RunTrace,
    derive_rng,
    persistence_crosstab,
    run_batch,
    run_repetition,
    validate_config,
)
from .game import (
    EpisodeRecord,
    EpsilonSchedule,
    PairingPolicy,
    allowed_pairs,
    play_episode,
    select_pair_and_roles,
)
from .metrics import (
    ALIGNED,
    SUCCESSFUL_MISUNDERSTANDING,
    UNCONVERGED,
    PopulationSnapshot,
    WindowAccumulator,
    alignment,
    classify_run,
    group_alignment,
    histogram,
    mean_vocabulary,
    snapshot_population,
)

__version__ = "0.1.0"
