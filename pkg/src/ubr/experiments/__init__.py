"""Experiment configs, figure presets, the runner and the command line."""

from .config import ExperimentConfig, from_ini, load_config, to_ini, validate
from .presets import PRESETS, get_preset
from .runner import analyze_wav, run_config, run_experiment, run_preset

__all__ = [
    "ExperimentConfig", "from_ini", "load_config", "to_ini", "validate",
    "PRESETS", "get_preset",
    "analyze_wav", "run_config", "run_experiment", "run_preset",
]
