"""TOML experiment configuration.

Sections mirror ``ExperimentConfig``::

    [experiment]      # scalar fields of ExperimentConfig
    scenario = "adaptive_order2"
    seeds = [0, 1, 2]

    [scene]           # SceneConfig fields
    inr_db = 20.0

    [learner]         # LearnerConfig fields
    discount = 0.95

    [sweep]           # optional lists used by the ``sweep`` command
    scenarios = ["stochastic_order3", "adaptive_order2"]

Unknown sections or keys are errors.
"""

from __future__ import annotations

import sys
from dataclasses import fields, replace
from pathlib import Path

from radarlz.active_lz import LearnerConfig
from radarlz.harness import OBJECTIVES, POLICIES, SCENARIOS, ConfigError, ExperimentConfig
from radarlz.radar_scene import SceneConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SWEEP_KEYS = {"scenarios": SCENARIOS, "objectives": OBJECTIVES, "policies": POLICIES}


def _names(cls) -> set[str]:
    return {f.name for f in fields(cls)}


def _check_keys(section: str, data: dict, allowed: set[str]) -> None:
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(unknown)}")


def config_from_dict(data: dict) -> tuple[ExperimentConfig, dict[str, list[str]]]:
    """Build an experiment config and the sweep axes from parsed TOML."""
    _check_keys("top level", data, {"experiment", "scene", "learner", "sweep"})
    experiment = dict(data.get("experiment", {}))
    _check_keys("experiment", experiment, _names(ExperimentConfig) - {"scene", "learner"})
    scene_data = data.get("scene", {})
    _check_keys("scene", scene_data, _names(SceneConfig))
    learner_data = data.get("learner", {})
    _check_keys("learner", learner_data, _names(LearnerConfig))
    sweep = dict(data.get("sweep", {}))
    _check_keys("sweep", sweep, set(SWEEP_KEYS))
    for key, allowed in SWEEP_KEYS.items():
        values = sweep.get(key)
        if values is None:
            continue
        if not isinstance(values, list) or not values or any(v not in allowed for v in values):
            raise ConfigError(f"[sweep] {key} must be a nonempty list drawn from {allowed}")
    try:
        scene = SceneConfig(**scene_data)
        learner = LearnerConfig(**learner_data)
        config = ExperimentConfig(scene=scene, learner=learner, **experiment)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    config.validate()
    return config, sweep


def load_config(path: str | Path) -> tuple[ExperimentConfig, dict[str, list[str]]]:
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data)


def sweep_configs(base: ExperimentConfig, sweep: dict[str, list[str]]) -> list[ExperimentConfig]:
    """Cartesian product scenario x objective x policy over ``base``."""
    out = []
    for scenario in sweep.get("scenarios", [base.scenario]):
        for objective in sweep.get("objectives", [base.objective]):
            for policy in sweep.get("policies", [base.policy]):
                out.append(replace(base, scenario=scenario, objective=objective, policy=policy))
    return out
