"""Experiment configuration, Monte Carlo runner, summaries and CLI."""

from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .runner import report, run_experiment, run_truth
from .summary import plot_data, summarize

__all__ = [
    "ConfigError", "ExperimentConfig", "load_config", "parse_config",
    "report", "run_experiment", "run_truth", "plot_data", "summarize",
]
