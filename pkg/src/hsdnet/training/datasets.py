"""
Datasets: an in-memory NCHW container, a procedural stand-in with a planted
two-level class hierarchy, and the CIFAR-10 binary reader.
"""

from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from ..engine.container import decode_tensors, encode_tensors, read_container, write_container
from ..errors import ContainerFormatError, DatasetFormatError
from ..utils.logger import get_logger

logger = get_logger(__name__)

Split = Literal["train", "test"]

CIFAR_RECORD_BYTES = 3073
CIFAR_SHAPE = (3, 32, 32)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Samples ``(images[i], labels[i])`` with labels indexing ``class_list``.

    ``mean``/``std`` are the per-channel statistics the images were
    standardized with, if any.
    """

    images: np.ndarray
    labels: np.ndarray
    class_list: tuple[str, ...]
    split: Split = "train"
    mean: np.ndarray | None = None
    std: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.images.ndim != 4:
            raise DatasetFormatError(f"images must be N x C x H x W, got shape {self.images.shape}")
        if self.labels.shape != (self.images.shape[0],):
            raise DatasetFormatError(
                f"{self.labels.shape[0] if self.labels.ndim else 0} labels for {self.images.shape[0]} images"
            )
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= len(self.class_list)):
            raise DatasetFormatError(
                f"labels must lie in [0, {len(self.class_list)}), got [{self.labels.min()}, {self.labels.max()}]"
            )

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def num_classes(self) -> int:
        return len(self.class_list)

    @property
    def image_shape(self) -> tuple[int, int, int]:
        _, c, h, w = self.images.shape
        return (c, h, w)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_classes)

    def subset(self, classes: Iterable[int]) -> "Dataset":
        """Samples whose label is in ``classes``; labels keep their global ids."""
        mask = np.isin(self.labels, list(classes))
        return replace(self, images=self.images[mask], labels=self.labels[mask])

    def batches(
        self, batch_size: int, rng: np.random.Generator | None = None
    ) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        """Mini-batches in dataset order, or in an ``rng`` permutation."""
        if batch_size <= 0:
            raise ValueError(f"batch size must be positive, got {batch_size}")
        order = np.arange(len(self)) if rng is None else rng.permutation(len(self))
        for start in range(0, len(self), batch_size):
            idx = order[start : start + batch_size]
            yield self.images[idx], self.labels[idx]

    def standardize(self, mean: np.ndarray | None = None, std: np.ndarray | None = None) -> "Dataset":
        """Per-channel standardization; statistics default to this split's own."""
        if mean is None or std is None:
            mean = self.images.mean(axis=(0, 2, 3))
            std = self.images.std(axis=(0, 2, 3))
        std = np.where(std > 0, std, 1.0)
        images = (self.images - mean[None, :, None, None]) / std[None, :, None, None]
        return replace(self, images=images, mean=np.asarray(mean), std=np.asarray(std))


class SynthSpec(BaseModel):
    """Procedural dataset: each class is one (texture, color family) pair."""

    model_config = ConfigDict(frozen=True)

    num_classes: int = 8
    samples_per_class: int = 100
    test_samples_per_class: int = 50
    image_size: int = 16
    num_colors: int = 2
    noise: float = 0.15
    seed: int = 7

    @model_validator(mode="after")
    def _check(self) -> "SynthSpec":
        if self.num_classes < 4 or self.num_classes % 2:
            raise ValueError(f"num_classes must be even and at least 4, got {self.num_classes}")
        if self.num_colors < 1 or self.num_classes % self.num_colors:
            raise ValueError(f"num_colors={self.num_colors} must divide num_classes={self.num_classes}")
        if self.samples_per_class <= 0 or self.test_samples_per_class < 0:
            raise ValueError("sample counts must be positive")
        if self.image_size < 4:
            raise ValueError(f"image_size must be at least 4, got {self.image_size}")
        if self.noise < 0:
            raise ValueError("noise must be non-negative")
        return self

    @property
    def num_shapes(self) -> int:
        return self.num_classes // self.num_colors


_COLOR_FAMILIES = np.array(
    [
        [0.9, 0.2, 0.2],
        [0.2, 0.3, 0.9],
        [0.2, 0.8, 0.3],
        [0.9, 0.8, 0.2],
        [0.8, 0.3, 0.8],
        [0.2, 0.8, 0.8],
        [0.9, 0.5, 0.1],
        [0.5, 0.5, 0.5],
    ]
)


def _texture(shape_id: int, size: int, dy: int, dx: int) -> np.ndarray:
    """A [0, 1] texture; ``shape_id`` picks the family and, past six, the frequency."""
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    y, x = y + dy, x + dx
    period = 4.0 + 2.0 * (shape_id // 6)
    family = shape_id % 6
    if family == 0:
        t = np.sin(2 * np.pi * y / period)
    elif family == 1:
        t = np.sin(2 * np.pi * x / period)
    elif family == 2:
        t = np.sin(np.pi * x / (period / 2)) * np.sin(np.pi * y / (period / 2))
    elif family == 3:
        c = (size - 1) / 2
        t = np.sin(2 * np.pi * np.hypot(y - dy - c, x - dx - c) / period)
    elif family == 4:
        t = np.sin(2 * np.pi * (x + y) / period)
    else:
        t = np.sin(2 * np.pi * (x - y) / period)
    return 0.5 * (t + 1.0)


def synth_class_list(spec: SynthSpec) -> tuple[str, ...]:
    return tuple(
        f"shape{c // spec.num_colors}-color{c % spec.num_colors}" for c in range(spec.num_classes)
    )


def synth_dataset(spec: SynthSpec, split: Split = "train") -> Dataset:
    """Generate one split; the two splits draw from independent child seeds."""
    train_seq, test_seq = np.random.SeedSequence(spec.seed).spawn(2)
    rng = np.random.default_rng(train_seq if split == "train" else test_seq)
    per_class = spec.samples_per_class if split == "train" else spec.test_samples_per_class
    size = spec.image_size

    images = np.empty((spec.num_classes * per_class, 3, size, size))
    labels = np.repeat(np.arange(spec.num_classes), per_class)
    for i, label in enumerate(labels):
        shape_id, color_id = divmod(int(label), spec.num_colors)
        dy, dx = rng.integers(0, size, size=2)
        pattern = _texture(shape_id, size, int(dy), int(dx))
        color = _COLOR_FAMILIES[color_id % len(_COLOR_FAMILIES)] * rng.uniform(0.8, 1.2)
        background = 0.1 + 0.05 * (color_id // len(_COLOR_FAMILIES))
        images[i] = pattern[None] * color[:, None, None] + (1.0 - pattern[None]) * background
    images += rng.normal(0.0, spec.noise, size=images.shape)

    order = rng.permutation(len(labels))
    dataset = Dataset(
        images=images[order],
        labels=labels[order].astype(np.int64),
        class_list=synth_class_list(spec),
        split=split,
    )
    logger.info(
        f"Synthesized {split} split: {len(dataset)} samples, {spec.num_classes} classes, "
        f"{size}x{size} images"
    )
    return dataset


def read_label_names(path: Path | str) -> tuple[str, ...]:
    """``batches.meta.txt``: one class name per line."""
    names = [line.strip() for line in Path(path).read_text().splitlines()]
    return tuple(n for n in names if n)


def load_cifar_binary(
    paths: Path | str | Sequence[Path | str],
    class_list: Sequence[str] | None = None,
    split: Split = "train",
    mean: np.ndarray | None = None,
    std: np.ndarray | None = None,
    standardize: bool = True,
) -> Dataset:
    """Read CIFAR-10 binary batches (1 label byte + 3072 pixel bytes per record).

    Pixels are scaled to [0, 1] and then standardized per channel, with this
    split's own statistics unless the training split's ``mean``/``std`` are
    given. ``standardize=False`` returns the scaled pixels.
    """
    if isinstance(paths, (str, Path)):
        paths = [paths]
    names = tuple(class_list) if class_list is not None else tuple(f"class{c}" for c in range(10))

    images, labels = [], []
    for path in paths:
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"CIFAR batch not found: {path}")
        raw = path.read_bytes()
        whole, extra = divmod(len(raw), CIFAR_RECORD_BYTES)
        if extra:
            raise DatasetFormatError(
                f"{path}: {len(raw)} bytes is not a multiple of {CIFAR_RECORD_BYTES}; "
                f"record {whole} is truncated at byte offset {whole * CIFAR_RECORD_BYTES}"
            )
        records = np.frombuffer(raw, dtype=np.uint8).reshape(whole, CIFAR_RECORD_BYTES)
        batch_labels = records[:, 0].astype(np.int64)
        if batch_labels.size and batch_labels.max() >= len(names):
            bad = int(np.argmax(batch_labels >= len(names)))
            raise DatasetFormatError(
                f"{path}: label {batch_labels[bad]} at byte offset {bad * CIFAR_RECORD_BYTES} "
                f"outside {len(names)} classes"
            )
        images.append(records[:, 1:].reshape(whole, *CIFAR_SHAPE).astype(np.float64) / 255.0)
        labels.append(batch_labels)
        logger.info(f"Read {whole} records from {path}")

    dataset = Dataset(
        images=np.concatenate(images) if images else np.empty((0, *CIFAR_SHAPE)),
        labels=np.concatenate(labels) if labels else np.empty(0, dtype=np.int64),
        class_list=names,
        split=split,
    )
    return dataset.standardize(mean, std) if standardize else dataset


class _DatasetMeta(BaseModel):
    kind: Literal["dataset"] = "dataset"
    class_list: tuple[str, ...]
    split: Split


def save_dataset(dataset: Dataset, path: Path | str) -> None:
    meta = _DatasetMeta(class_list=dataset.class_list, split=dataset.split)
    tensors = {"images": dataset.images, "labels": dataset.labels.astype(np.float64)}
    if dataset.mean is not None and dataset.std is not None:
        tensors.update(mean=dataset.mean, std=dataset.std)
    write_container(path, [(b"META", meta.model_dump_json().encode("utf-8")), (b"DATA", encode_tensors(tensors))])


def load_dataset(path: Path | str) -> Dataset:
    sections = read_container(path)
    if b"DATA" not in sections or b"META" not in sections:
        raise ContainerFormatError(f"{path}: not a dataset file (needs META and DATA sections)")
    try:
        meta = _DatasetMeta.model_validate_json(sections[b"META"])
    except ValidationError as e:
        raise ContainerFormatError(f"{path}: unreadable META section: {e}") from e
    tensors = decode_tensors(sections[b"DATA"], f"{path} DATA section")
    return Dataset(
        images=tensors["images"],
        labels=tensors["labels"].astype(np.int64),
        class_list=meta.class_list,
        split=meta.split,
        mean=tensors.get("mean"),
        std=tensors.get("std"),
    )
