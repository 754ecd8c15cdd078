"""Evaluation pipeline: run configuration and the end-to-end runner."""

from .config import ConfigError, RunConfig, load_config
from .runner import (RunLogger, RunNotFound, RunResult, generate_run_id,
                     load_records, load_run, run_dir_for, run_evaluation)

__all__ = [
    "ConfigError",
    "RunConfig",
    "load_config",
    "RunLogger",
    "RunNotFound",
    "RunResult",
    "generate_run_id",
    "load_records",
    "load_run",
    "run_dir_for",
    "run_evaluation",
]
