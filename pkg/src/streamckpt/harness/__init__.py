"""Experiment runner, metrics and configuration files."""

from .config import CONFIG_HEADER, ExperimentConfig, MstConfig, RunSpec, WorkloadConfig, load_config, parse_config
from .experiment import REPORT_HEADER, NeverSustainable, measure_mst, run_experiment, run_spec, with_overhead
from .metrics import EmptyBucket, MetricsReport, latency_series, nearest_rank

__all__ = [
    "CONFIG_HEADER", "ExperimentConfig", "MstConfig", "RunSpec", "WorkloadConfig", "load_config",
    "parse_config", "REPORT_HEADER", "NeverSustainable", "measure_mst", "run_experiment", "run_spec",
    "with_overhead", "EmptyBucket", "MetricsReport", "latency_series", "nearest_rank",
]
