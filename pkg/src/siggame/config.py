"""Experiment configuration files: YAML parsing, overrides, round-tripping."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Mapping

import yaml

from .env import RewardMatrix, explicit_reward
from .experiment import (
    ConfigError,
    EnvironmentSpec,
    EpsilonSpec,
    ExperimentConfig,
    PhaseOneSpec,
    PhaseTwoSpec,
    PRESETS,
)


def _require_keys(section: Mapping, allowed: set[str], where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def _environment_from_dict(section: Mapping) -> EnvironmentSpec:
    _require_keys(section, {"family", "matrices"}, "environment")
    matrices = section.get("matrices")
    if matrices is not None:
        parsed = []
        for i, entry in enumerate(matrices):
            if isinstance(entry, Mapping):
                _require_keys(entry, {"tag", "rows"}, f"environment.matrices[{i}]")
                rows = entry["rows"]
                tag = entry.get("tag", f"M{i + 1}")
            else:
                rows, tag = entry, f"M{i + 1}"
            parsed.append(explicit_reward(rows, str(tag)))
        return EnvironmentSpec(family=None, matrices=tuple(parsed))
    return EnvironmentSpec(family=section.get("family", "symmetric_2x2"))


def config_from_dict(data: Mapping[str, Any]) -> ExperimentConfig:
    if not isinstance(data, Mapping):
        raise ConfigError("configuration must be a mapping")
    _require_keys(
        data,
        {"name", "phase1", "intervention", "phase2", "environment", "epsilon",
         "checkpoints", "repetitions", "master_seed"},
        "config",
    )
    try:
        p1 = dict(data.get("phase1") or {})
        _require_keys(p1, {"num_agents", "episodes", "groups"}, "phase1")
        groups = p1.get("groups")
        phase1 = PhaseOneSpec(
            num_agents=int(p1["num_agents"]),
            episodes=int(p1.get("episodes", 10000)),
            groups=tuple(tuple(int(a) for a in g) for g in groups) if groups else None,
        )
        p2 = dict(data.get("phase2") or {})
        _require_keys(p2, {"episodes"}, "phase2")
        eps = dict(data.get("epsilon") or {})
        _require_keys(eps, {"start", "decay_episodes", "reset"}, "epsilon")
        return ExperimentConfig(
            name=str(data.get("name", "unnamed")),
            phase1=phase1,
            intervention=str(data.get("intervention", "none")),
            phase2=PhaseTwoSpec(episodes=int(p2.get("episodes", 10000))),
            environment=_environment_from_dict(dict(data.get("environment") or {})),
            epsilon=EpsilonSpec(
                start=float(eps.get("start", 0.2)),
                decay_episodes=int(eps.get("decay_episodes", 5000)),
                reset=str(eps.get("reset", "per_phase")),
            ),
            checkpoints=tuple(int(c) for c in data.get("checkpoints", (100, 500, 5000, 10000))),
            repetitions=int(data.get("repetitions", 1000)),
            master_seed=int(data.get("master_seed", 0)),
        )
    except KeyError as exc:
        raise ConfigError(f"missing required config key: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed config value: {exc}") from exc


def config_to_dict(config: ExperimentConfig) -> dict:
    env: dict[str, Any]
    if config.environment.matrices is not None:
        env = {
            "matrices": [
                {"tag": m.tag, "rows": [list(row) for row in m.cells]}
                for m in config.environment.matrices
            ]
        }
    else:
        env = {"family": config.environment.family}
    data: dict[str, Any] = {
        "name": config.name,
        "phase1": {
            "num_agents": config.phase1.num_agents,
            "episodes": config.phase1.episodes,
        },
        "intervention": config.intervention,
        "phase2": {"episodes": config.phase2.episodes},
        "environment": env,
        "epsilon": {
            "start": config.epsilon.start,
            "decay_episodes": config.epsilon.decay_episodes,
            "reset": config.epsilon.reset,
        },
        "checkpoints": list(config.checkpoints),
        "repetitions": config.repetitions,
        "master_seed": config.master_seed,
    }
    if config.phase1.groups is not None:
        data["phase1"]["groups"] = [list(g) for g in config.phase1.groups]
    return data


def load_config(source: str | Path) -> ExperimentConfig:
    """Resolve a preset name or a YAML file path."""
    name = str(source)
    if name in PRESETS:
        return PRESETS[name]
    path = Path(name)
    if not path.exists():
        raise ConfigError(
            f"{name!r} is neither a preset ({', '.join(sorted(PRESETS))}) nor a file"
        )
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    return config_from_dict(data or {})


def apply_overrides(config: ExperimentConfig, assignments: list[str]) -> ExperimentConfig:
    """Apply dotted-path key=value overrides (values parsed as YAML scalars)."""
    if not assignments:
        return config
    data = config_to_dict(config)
    for assignment in assignments:
        if "=" not in assignment:
            raise ConfigError(f"override {assignment!r} is not of the form key=value")
        key, _, raw = assignment.partition("=")
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigError(f"override {assignment!r}: bad value: {exc}") from exc
        node = data
        parts = key.strip().split(".")
        for part in parts[:-1]:
            nxt = node.setdefault(part, {})
            if not isinstance(nxt, dict):
                raise ConfigError(f"override {assignment!r}: {part} is not a section")
            node = nxt
        node[parts[-1]] = value
    return config_from_dict(data)
