"""Subset sweeps: subnetwork accuracy against the full tree over sampled class subsets."""

import csv
import itertools
import math
from collections.abc import Iterable
from pathlib import Path

import numpy as np
from pydantic import BaseModel

from ..engine.accounting import count_macs, count_params
from ..model.tree import HsdTree
from ..training.datasets import Dataset
from ..training.trainer import evaluate
from ..utils.logger import get_logger
from .extract import extract_subnetwork

logger = get_logger(__name__)

SWEEP_COLUMNS = ("subset", "cardinality", "subnet_accuracy", "fulltree_accuracy", "params", "macs")


class SweepRow(BaseModel):
    subset: tuple[int, ...]
    cardinality: int
    subnet_accuracy: float
    fulltree_accuracy: float
    params: int
    macs: int


def sample_subsets(
    num_classes: int, cardinality: int, count: int, rng: np.random.Generator
) -> list[tuple[int, ...]]:
    """``count`` distinct subsets, or every subset when there are no more than that."""
    if cardinality < 2:
        raise ValueError(f"subset cardinality must be at least 2, got {cardinality}")
    if cardinality > num_classes:
        raise ValueError(f"cardinality {cardinality} exceeds the {num_classes} classes")
    if math.comb(num_classes, cardinality) <= count:
        return list(itertools.combinations(range(num_classes), cardinality))
    seen: dict[tuple[int, ...], None] = {}
    while len(seen) < count:
        pick = tuple(sorted(int(c) for c in rng.choice(num_classes, cardinality, replace=False)))
        seen.setdefault(pick, None)
    return list(seen)


def subset_sweep(
    tree: HsdTree,
    dataset: Dataset,
    cardinalities: Iterable[int],
    combinations_per_cardinality: int,
    seed: int = 0,
) -> list[SweepRow]:
    if combinations_per_cardinality <= 0:
        raise ValueError("combinations per cardinality must be positive")
    rng = np.random.default_rng(seed)
    rows: list[SweepRow] = []
    for k in cardinalities:
        for subset in sample_subsets(tree.num_classes, k, combinations_per_cardinality, rng):
            sub = extract_subnetwork(tree, subset)
            rows.append(
                SweepRow(
                    subset=subset,
                    cardinality=k,
                    subnet_accuracy=evaluate(sub, dataset, subset),
                    fulltree_accuracy=evaluate(tree, dataset, subset),
                    params=count_params(sub),
                    macs=count_macs(sub),
                )
            )
        logger.info(f"Sweep: cardinality {k} done ({len(rows)} rows so far)")
    return rows


def write_sweep_csv(rows: list[SweepRow], path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    ";".join(str(c) for c in row.subset),
                    row.cardinality,
                    repr(row.subnet_accuracy),
                    repr(row.fulltree_accuracy),
                    row.params,
                    row.macs,
                ]
            )
    logger.info(f"Wrote {len(rows)} sweep rows to {path}")
