"""Mini-batch SGD for chains and trees, and accuracy evaluation."""

from collections.abc import Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..config import settings
from ..engine.graph import Network
from ..engine.losses import softmax_cross_entropy
from ..engine.optim import sgd_step
from ..engine.passes import backward, forward
from ..errors import NonFiniteError, ShapeMismatchError, TreeInvariantError
from ..model.chain import ChainNet
from ..model.tree import HsdTree
from ..utils.logger import get_logger
from .datasets import Dataset

logger = get_logger(__name__)

NetT = TypeVar("NetT", ChainNet, HsdTree)


class TrainSchedule(BaseModel):
    """Step schedule: lr = initial_lr / decay_factor ** (epoch // decay_every)."""

    model_config = ConfigDict(frozen=True)

    epochs: int = 30
    initial_lr: float = 0.01
    lr_decay_factor: float = 10.0
    lr_decay_every_epochs: int = 50
    batch_size: int = 32
    seed: int = 0

    @model_validator(mode="after")
    def _check(self) -> "TrainSchedule":
        if self.epochs < 0:
            raise ValueError(f"epochs must be non-negative, got {self.epochs}")
        if self.initial_lr <= 0 or self.lr_decay_factor <= 0:
            raise ValueError("learning rate and decay factor must be positive")
        if self.lr_decay_every_epochs <= 0 or self.batch_size <= 0:
            raise ValueError("decay period and batch size must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        return self

    def lr_at(self, epoch: int) -> float:
        return self.initial_lr / self.lr_decay_factor ** (epoch // self.lr_decay_every_epochs)


class EpochRecord(BaseModel):
    epoch: int
    lr: float
    loss: float
    accuracy: float


class TrainHistory(BaseModel):
    initial_loss: float
    epochs: list[EpochRecord] = Field(default_factory=list)

    @property
    def final_accuracy(self) -> float | None:
        return self.epochs[-1].accuracy if self.epochs else None


def accuracy_from_logits(
    logits: np.ndarray, labels: np.ndarray, restrict_to: Iterable[int] | None = None
) -> float:
    preds = _argmax(logits, restrict_to)
    return float(np.mean(preds == labels)) if len(labels) else 0.0


def _argmax(logits: np.ndarray, restrict_to: Iterable[int] | None) -> np.ndarray:
    if restrict_to is None:
        return np.argmax(logits, axis=1)
    cols = np.array(sorted(set(restrict_to)), dtype=np.int64)
    return cols[np.argmax(logits[:, cols], axis=1)]


def predict(net: Network, images: np.ndarray, restrict_to: Iterable[int] | None = None) -> np.ndarray:
    """Class ids by argmax over all classes, or over ``restrict_to`` only."""
    return _argmax(forward(net, images).logits, restrict_to)


def mean_loss(net: Network, dataset: Dataset, batch_size: int = 256) -> float:
    """Mean cross-entropy over a dataset, no updates."""
    total = 0.0
    for x, y in dataset.batches(batch_size):
        loss, _ = softmax_cross_entropy(forward(net, x).logits, y)
        total += loss * len(y)
    return total / len(dataset)


def _check_data(net: Network, dataset: Dataset) -> None:
    if dataset.num_classes != net.num_classes:
        raise ShapeMismatchError(
            f"dataset has {dataset.num_classes} classes, network has {net.num_classes}"
        )
    if dataset.image_shape != tuple(net.input_shape):
        raise ShapeMismatchError(
            f"layer 0: dataset images {dataset.image_shape} do not match input {net.input_shape}"
        )
    if not len(dataset):
        raise ValueError("cannot train on an empty dataset")


def _fit(net: NetT, dataset: Dataset, schedule: TrainSchedule, what: str) -> tuple[NetT, TrainHistory]:
    _check_data(net, dataset)
    rng = np.random.default_rng(schedule.seed)
    history = TrainHistory(initial_loss=mean_loss(net, dataset))
    logger.info(f"Training {what}: {schedule.epochs} epochs, initial loss {history.initial_loss:.4f}")

    for epoch in range(schedule.epochs):
        lr = schedule.lr_at(epoch)
        loss_sum, correct = 0.0, 0
        for step, (x, y) in enumerate(dataset.batches(schedule.batch_size, rng)):
            result = forward(net, x)
            loss, dlogits = softmax_cross_entropy(result.logits, y)
            if not np.isfinite(loss):
                raise NonFiniteError(f"epoch {epoch}, batch {step}: non-finite loss {loss}")
            grads = backward(net, result, grad_logits=dlogits)
            try:
                net = net.with_params(sgd_step(net.params, grads.params, lr))
            except NonFiniteError as e:
                raise NonFiniteError(f"epoch {epoch}, batch {step}: {e}") from e
            loss_sum += loss * len(y)
            correct += int(np.sum(np.argmax(result.logits, axis=1) == y))
            logger.debug(f"epoch {epoch} batch {step}: loss {loss:.4f}")

        record = EpochRecord(
            epoch=epoch, lr=lr, loss=loss_sum / len(dataset), accuracy=correct / len(dataset)
        )
        history.epochs.append(record)
        logger.info(
            f"{what} epoch {epoch}: lr {lr:g}, loss {record.loss:.4f}, accuracy {record.accuracy:.4f}"
        )
    return net, history


def train(net: ChainNet, dataset: Dataset, schedule: TrainSchedule) -> tuple[ChainNet, TrainHistory]:
    """Train a chain with softmax cross-entropy."""
    if dataset.class_list != net.class_list:
        raise ShapeMismatchError("dataset class list does not match the network's")
    return _fit(net, dataset, schedule, "chain")


def finetune(tree: HsdTree, dataset: Dataset, schedule: TrainSchedule) -> tuple[HsdTree, TrainHistory]:
    """Train every edge and head of a transferred tree under one global softmax."""
    missing = tree.missing_params()
    if missing:
        raise TreeInvariantError(f"tree is not fully parameterized, missing {missing[:5]}")
    uncovered = sorted(set(np.unique(dataset.labels).tolist()) - set(tree.covered_classes()))
    if uncovered:
        raise ValueError(f"dataset holds classes {uncovered} that no leaf of the tree covers")
    return _fit(tree, dataset, schedule, "tree")


def _count_correct(net: Network, images: np.ndarray, labels: np.ndarray, restrict_to, batch_size: int) -> int:
    correct = 0
    for start in range(0, len(labels), batch_size):
        preds = predict(net, images[start : start + batch_size], restrict_to)
        correct += int(np.sum(preds == labels[start : start + batch_size]))
    return correct


def evaluate(
    net: Network,
    dataset: Dataset,
    restrict_to: Iterable[int] | None = None,
    batch_size: int = 256,
) -> float:
    """Top-1 accuracy; with ``restrict_to``, over that subset's samples and classes only."""
    subset = None
    if restrict_to is not None:
        subset = sorted(set(int(c) for c in restrict_to))
        unknown = [c for c in subset if not 0 <= c < dataset.num_classes]
        if not subset or unknown:
            raise ValueError(f"restriction {subset} is not a nonempty subset of the class list")
        dataset = dataset.subset(subset)
    if not len(dataset):
        raise ValueError("nothing to evaluate: the effective dataset is empty")

    shards = np.array_split(np.arange(len(dataset)), max(1, min(settings.THREADS, len(dataset))))
    with ThreadPoolExecutor(max_workers=len(shards)) as pool:
        counts = pool.map(
            lambda idx: _count_correct(net, dataset.images[idx], dataset.labels[idx], subset, batch_size),
            shards,
        )
        correct = sum(counts)
    return correct / len(dataset)
