"""Compression rate, saved computations and speedup of a reduced network."""

import statistics
import time
from collections.abc import Iterable

import numpy as np
from pydantic import BaseModel

from ..config import settings
from ..engine.accounting import count_macs, count_params
from ..engine.graph import Network
from ..engine.passes import forward
from ..training.datasets import Dataset
from ..training.trainer import evaluate
from ..utils.logger import get_logger

logger = get_logger(__name__)


def compression_rate(params_base: float, params_reduced: float) -> float:
    return params_base / params_reduced


def saved_computations(macs_base: float, macs_reduced: float) -> float:
    """Fraction of per-sample MACs saved; negative when the reduced net costs more."""
    return (macs_base - macs_reduced) / macs_base


def speedup(latency_base: float, latency_reduced: float) -> float:
    return latency_base / latency_reduced


def accuracy_drop(base: float, decomposed: float) -> float:
    return base - decomposed


class MetricsReport(BaseModel):
    params_base: int
    params_reduced: int
    macs_base: int
    macs_reduced: int
    compression_rate: float
    saved_computations: float
    latency_base: float | None = None
    latency_reduced: float | None = None
    speedup: float | None = None
    accuracy_base: float | None = None
    accuracy_reduced: float | None = None
    accuracy_drop: float | None = None

    def to_row(self) -> dict[str, float | int | None]:
        return self.model_dump()


def measure_latency(net: Network, sample: np.ndarray, reps: int, warmup: int | None = None) -> float:
    """Median seconds of ``reps`` single-sample forwards after ``warmup`` discarded runs."""
    if reps <= 0:
        raise ValueError(f"latency reps must be positive, got {reps}")
    sample = sample[:1]
    for _ in range(settings.LATENCY_WARMUP if warmup is None else warmup):
        forward(net, sample)
    timings = []
    for _ in range(reps):
        start = time.perf_counter()
        forward(net, sample)
        timings.append(time.perf_counter() - start)
    return statistics.median(timings)


def compute_metrics(
    base: Network,
    reduced: Network,
    dataset: Dataset | None = None,
    latency_reps: int = 20,
    restrict_to: Iterable[int] | None = None,
) -> MetricsReport:
    """Structure metrics always; latency and accuracy when a dataset is given."""
    a, a_star = count_params(base), count_params(reduced)
    n, n_star = count_macs(base), count_macs(reduced)
    report = MetricsReport(
        params_base=a,
        params_reduced=a_star,
        macs_base=n,
        macs_reduced=n_star,
        compression_rate=compression_rate(a, a_star),
        saved_computations=saved_computations(n, n_star),
    )
    if dataset is not None and len(dataset):
        s = measure_latency(base, dataset.images, latency_reps)
        s_star = measure_latency(reduced, dataset.images, latency_reps)
        restrict = list(restrict_to) if restrict_to is not None else None
        acc, acc_star = evaluate(base, dataset, restrict), evaluate(reduced, dataset, restrict)
        report = report.model_copy(
            update=dict(
                latency_base=s,
                latency_reduced=s_star,
                speedup=speedup(s, s_star),
                accuracy_base=acc,
                accuracy_reduced=acc_star,
                accuracy_drop=accuracy_drop(acc, acc_star),
            )
        )
    logger.info(
        f"Metrics: compression {report.compression_rate:.2f}x, "
        f"saved computations {100 * report.saved_computations:.2f}%"
    )
    return report
