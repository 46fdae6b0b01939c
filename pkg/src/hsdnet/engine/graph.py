"""Structural view the engine executes: parameter store and compute nodes."""

from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .specs import LayerKind, LayerSpec


@dataclass(frozen=True, eq=False)
class ParamStore(Mapping[str, np.ndarray]):
    """Named float64 tensors, keyed ``<owner>.<suffix>`` (e.g. ``conv3.weight``)."""

    tensors: dict[str, np.ndarray] = field(default_factory=dict)

    def __getitem__(self, key: str) -> np.ndarray:
        return self.tensors[key]

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self.tensors))

    def __len__(self) -> int:
        return len(self.tensors)

    def shapes(self) -> dict[str, tuple[int, ...]]:
        return {k: tuple(v.shape) for k, v in self.tensors.items()}

    def copy(self) -> "ParamStore":
        return ParamStore({k: v.copy() for k, v in self.tensors.items()})

    def merged(self, other: Mapping[str, np.ndarray]) -> "ParamStore":
        return ParamStore({**self.tensors, **dict(other)})

    def restricted(self, owners: set[str]) -> "ParamStore":
        """Tensors whose owner prefix is in ``owners``, shared (not copied)."""
        return ParamStore({k: v for k, v in self.tensors.items() if k.split(".", 1)[0] in owners})

    def size(self) -> int:
        return int(sum(v.size for v in self.tensors.values()))


@dataclass(frozen=True)
class HeadSpec:
    """Global-average-pool + dense classifier owned by a leaf."""

    key: str
    in_features: int
    classes: tuple[int, ...]

    @property
    def dense(self) -> LayerSpec:
        return LayerSpec(kind=LayerKind.DENSE, in_channels=self.in_features, out_channels=len(self.classes))


@dataclass(frozen=True)
class ComputeNode:
    """One activation map and the edge that produces it from its parent.

    The image is node 0 with ``parent_id=None`` and no layers.
    """

    node_id: int
    parent_id: int | None
    layer_index: int
    layers: tuple[LayerSpec, ...]
    edge_key: str
    head: HeadSpec | None = None

    @property
    def out_channels(self) -> int:
        return self.layers[-1].out_channels if self.layers else 0


class Network(Protocol):
    """Anything the engine can run: a chain or a tree."""

    params: ParamStore

    @property
    def num_classes(self) -> int: ...

    @property
    def input_shape(self) -> tuple[int, int, int]: ...

    def compute_nodes(self) -> list[ComputeNode]: ...

    def with_params(self, params: ParamStore) -> "Network": ...


def structure_signature(net: Network) -> tuple[object, ...]:
    """Hashable description of a network's structure, used to detect stale pass results."""
    return tuple(
        (n.node_id, n.parent_id, n.layers, n.head.classes if n.head else None)
        for n in net.compute_nodes()
    )


def param_key(owner: str, suffix: str) -> str:
    return f"{owner}.{suffix}"
