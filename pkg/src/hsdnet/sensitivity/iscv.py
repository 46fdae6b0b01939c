"""
Impact score class vectors.

Every channel k of layer l gets a virtual multiplier w_k fixed at 1. The
raw impact of k on class c is the sum, over training samples of class c, of
|d p_y / d w_k| where p_y is the softmax probability of the sample's own
class. Rows are then divided by their maximum.
"""

from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np

from ..engine.losses import true_class_probability_seed
from ..engine.passes import backward, forward
from ..errors import ShapeMismatchError
from ..model.chain import ChainNet
from ..training.datasets import Dataset
from ..utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class ScaledLayerProbe:
    """Per-channel weights w_k for one conv layer, all ones."""

    layer_index: int
    weights: np.ndarray = field(repr=False)

    @classmethod
    def at(cls, net: ChainNet, layer_index: int) -> "ScaledLayerProbe":
        if layer_index not in net.conv_layer_indices():
            raise ShapeMismatchError(
                f"layer {layer_index}: not a conv layer (chain has layers 1..{net.depth})"
            )
        return cls(layer_index, np.ones(net.width(layer_index)))


@dataclass(frozen=True, eq=False)
class IscvMatrix:
    """|C| x K impact scores of one layer, raw and row-normalized.

    ``absent`` lists classes with no samples; their rows are zero.
    """

    layer_index: int
    scores: np.ndarray
    raw_scores: np.ndarray
    absent: tuple[int, ...] = ()
    class_list: tuple[str, ...] = ()

    @property
    def width(self) -> int:
        return int(self.scores.shape[1])

    @property
    def num_classes(self) -> int:
        return int(self.scores.shape[0])

    def rows(self, classes: Iterable[int]) -> np.ndarray:
        return self.scores[list(classes)]


def normalize_iscv(
    raw: np.ndarray,
    layer_index: int = 0,
    absent: Iterable[int] = (),
    class_list: tuple[str, ...] = (),
) -> IscvMatrix:
    """Divide each row by its maximum; all-zero rows stay zero."""
    raw = np.asarray(raw, dtype=np.float64)
    if raw.ndim != 2:
        raise ShapeMismatchError(f"layer {layer_index}: impact table must be 2-d, got {raw.shape}")
    if np.any(raw < 0):
        raise ValueError(f"layer {layer_index}: impact scores must be non-negative")
    peak = raw.max(axis=1, keepdims=True)
    scores = np.divide(raw, peak, out=np.zeros_like(raw), where=peak > 0)
    return IscvMatrix(
        layer_index=layer_index,
        scores=scores,
        raw_scores=raw,
        absent=tuple(sorted(int(c) for c in absent)),
        class_list=class_list,
    )


def _absent_classes(dataset: Dataset, num_classes: int) -> tuple[int, ...]:
    counts = np.bincount(dataset.labels, minlength=num_classes)
    return tuple(int(c) for c in np.flatnonzero(counts == 0))


def _raw_impacts(
    net: ChainNet, dataset: Dataset, layers: list[int], batch_size: int
) -> dict[int, np.ndarray]:
    """One forward/backward per batch, all probes at once."""
    if dataset.class_list != net.class_list:
        raise ShapeMismatchError(
            f"dataset has {dataset.num_classes} classes, network has {net.num_classes}"
        )
    probes = {l: ScaledLayerProbe.at(net, l) for l in layers}
    raw = {l: np.zeros((net.num_classes, probe.weights.shape[0])) for l, probe in probes.items()}
    for step, (x, y) in enumerate(dataset.batches(batch_size)):
        result = forward(net, x, {l: p.weights for l, p in probes.items()})
        seed = true_class_probability_seed(result.probabilities, y)
        grads = backward(net, result, grad_logits=seed)
        for l in layers:
            np.add.at(raw[l], y, np.abs(grads.probes_per_sample[l]))
        logger.debug(f"Impact scores: batch {step} ({len(y)} samples)")
    return raw


def impact_scores(
    net: ChainNet, dataset: Dataset, layer_index: int, batch_size: int = 64
) -> np.ndarray:
    """Raw |C| x K table for one conv layer."""
    return _raw_impacts(net, dataset, [layer_index], batch_size)[layer_index]


def iscv_all_layers(
    net: ChainNet,
    dataset: Dataset,
    layers: Iterable[int] | None = None,
    batch_size: int = 64,
) -> dict[int, IscvMatrix]:
    """Normalized Iscv for each requested conv layer (every conv layer by default)."""
    wanted = sorted(set(layers)) if layers is not None else net.conv_layer_indices()
    if not len(dataset):
        raise ValueError("cannot compute impact scores on an empty dataset")
    absent = _absent_classes(dataset, net.num_classes)
    if absent:
        logger.warning(f"Classes without samples (rows left zero): {list(absent)}")
    raw = _raw_impacts(net, dataset, wanted, batch_size)
    logger.info(f"Computed Iscv for layers {wanted} over {len(dataset)} samples")
    return {l: normalize_iscv(raw[l], l, absent, net.class_list) for l in wanted}
