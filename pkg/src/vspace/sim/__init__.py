"""Deterministic election simulator: scenario configs, adversaries, CLI."""

from .config import AdversaryAction, AdversaryKind, ConfigInvalid, ScenarioConfig, config_from_mapping, load_config
from .scenario import (
    Decision,
    ScenarioHalted,
    SimReport,
    VoterIntent,
    ground_truth_oracle,
    run_scenario,
)

__all__ = [
    "AdversaryAction",
    "AdversaryKind",
    "ConfigInvalid",
    "Decision",
    "ScenarioConfig",
    "ScenarioHalted",
    "SimReport",
    "VoterIntent",
    "config_from_mapping",
    "ground_truth_oracle",
    "load_config",
    "run_scenario",
]
