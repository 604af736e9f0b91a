"""Config-driven experiment runner, figure presets, fits and the CLI."""

from .config import ConfigError, ExperimentConfig, PRESET_NAMES, load_config, preset_config
from .fits import FitResult, fit_linear, fit_loglog
from .runner import CSV_COLUMNS, SPECTRUM_COLUMNS, read_rows, reflection_scan, run

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "PRESET_NAMES",
    "load_config",
    "preset_config",
    "FitResult",
    "fit_linear",
    "fit_loglog",
    "CSV_COLUMNS",
    "SPECTRUM_COLUMNS",
    "read_rows",
    "reflection_scan",
    "run",
]
