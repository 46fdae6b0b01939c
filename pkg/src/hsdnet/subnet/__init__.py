"""Subnetwork extraction, efficiency metrics and subset sweeps."""

from .extract import extract_subnetwork, leaf_paths, path_subnetwork
from .metrics import (
    MetricsReport,
    accuracy_drop,
    compression_rate,
    compute_metrics,
    measure_latency,
    saved_computations,
    speedup,
)
from .sweep import SweepRow, subset_sweep, write_sweep_csv

__all__ = [
    "MetricsReport",
    "SweepRow",
    "accuracy_drop",
    "compression_rate",
    "compute_metrics",
    "extract_subnetwork",
    "leaf_paths",
    "measure_latency",
    "path_subnetwork",
    "saved_computations",
    "speedup",
    "subset_sweep",
    "write_sweep_csv",
]
