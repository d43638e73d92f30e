"""Experiment harness: specifications, sweeps, scheduling and reports."""

from ..hardware.scheduling import InstancePlan, schedule
from .harness import (
    ExperimentResult,
    RunResult,
    default_repetitions,
    run_cell,
    run_experiment,
)
from .networks import (
    NETWORK_PRESETS,
    NetworkBundle,
    NetworkPreset,
    load_network,
    train_genome,
    train_preset,
)
from .report import best_marks, format_table, load_results, report, to_csv, to_json
from .spec import ExperimentSpec, SweepAxis, apply_path

__all__ = [
    "NETWORK_PRESETS",
    "ExperimentResult",
    "ExperimentSpec",
    "InstancePlan",
    "NetworkBundle",
    "NetworkPreset",
    "RunResult",
    "SweepAxis",
    "apply_path",
    "best_marks",
    "default_repetitions",
    "format_table",
    "load_network",
    "load_results",
    "report",
    "run_cell",
    "run_experiment",
    "schedule",
    "to_csv",
    "to_json",
    "train_genome",
    "train_preset",
]
