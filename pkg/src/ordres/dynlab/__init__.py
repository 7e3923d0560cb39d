"""Experiment runner and command-line interface."""

from .cli import main
from .config import ExperimentConfig, load_config, validate_config
from .presets import PRESETS, quadratic_map, haar_map, preset_barycenter, preset_map, square_map
from .runner import RunReport, export_csv, run_experiment

__all__ = [
    "ExperimentConfig",
    "PRESETS",
    "RunReport",
    "quadratic_map",
    "export_csv",
    "haar_map",
    "load_config",
    "main",
    "preset_barycenter",
    "preset_map",
    "run_experiment",
    "square_map",
    "validate_config",
]
