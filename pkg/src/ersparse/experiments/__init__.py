"""Reproducible experiments that emit CSV tables and a JSON summary."""

from .config import EXPERIMENTS, FIELDS, ExperimentConfig, load_config
from .output import ExperimentResult, Table, write_result
from .runs import RUNNERS, run_experiment

__all__ = ["EXPERIMENTS", "FIELDS", "ExperimentConfig", "ExperimentResult", "RUNNERS", "Table",
           "load_config", "run_experiment", "write_result"]
