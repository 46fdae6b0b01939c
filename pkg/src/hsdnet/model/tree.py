"""The decomposed tree network and its structural checks."""

from collections.abc import Iterable
from dataclasses import dataclass, field, replace
from functools import cached_property

from ..engine.graph import ComputeNode, HeadSpec, ParamStore
from ..engine.specs import LayerSpec
from .chain import NetworkConfig, block_layers

ROOT_ID = 0


@dataclass(frozen=True)
class ChannelSelection:
    """Strictly increasing channel positions into a conventional layer's K channels."""

    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(i < 0 for i in self.indices):
            raise ValueError(f"negative channel index in {self.indices}")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError(f"channel indices must be strictly increasing: {self.indices}")

    @classmethod
    def full(cls, k: int) -> "ChannelSelection":
        return cls(tuple(range(k)))

    @classmethod
    def of(cls, indices: Iterable[int]) -> "ChannelSelection":
        return cls(tuple(sorted(int(i) for i in indices)))

    def __len__(self) -> int:
        return len(self.indices)

    def fits(self, k: int) -> bool:
        return all(i < k for i in self.indices)


@dataclass(frozen=True)
class HsdNode:
    """A node v of the tree: L(v), P(v), C(v) and its channel selection."""

    node_id: int
    layer_index: int
    parent_id: int | None
    class_set: tuple[int, ...]
    channels: ChannelSelection

    @property
    def is_root(self) -> bool:
        return self.parent_id is None


def edge_key(parent_id: int, child_id: int) -> str:
    return f"edge{parent_id}_{child_id}"


def head_key(leaf_id: int) -> str:
    return f"head{leaf_id}"


@dataclass(frozen=True, eq=False)
class HsdTree:
    """Tree network G^H.

    ``source`` is the architecture of the chain the tree was cut from; it
    fixes K per layer, pool placement and the full class list C.
    ``params`` holds edge and head tensors and is empty until transfer.
    """

    source: NetworkConfig
    nodes: dict[int, HsdNode]
    params: ParamStore = field(default_factory=ParamStore)

    @property
    def class_list(self) -> tuple[str, ...]:
        return self.source.resolved_class_names()

    @property
    def num_classes(self) -> int:
        return self.source.num_classes

    @property
    def input_shape(self) -> tuple[int, int, int]:
        return (self.source.input_channels, self.source.input_size, self.source.input_size)

    @property
    def root(self) -> HsdNode:
        return self.nodes[ROOT_ID]

    def children(self, node_id: int) -> list[HsdNode]:
        return sorted(
            (n for n in self.nodes.values() if n.parent_id == node_id), key=lambda n: n.node_id
        )

    def leaves(self) -> list[HsdNode]:
        parents = {n.parent_id for n in self.nodes.values()}
        return [self.nodes[i] for i in sorted(self.nodes) if i not in parents]

    def path_to_root(self, node_id: int) -> list[HsdNode]:
        path = []
        current: int | None = node_id
        while current is not None:
            node = self.nodes[current]
            path.append(node)
            current = node.parent_id
        return path[::-1]

    def covered_classes(self) -> tuple[int, ...]:
        return tuple(sorted(c for leaf in self.leaves() for c in leaf.class_set))

    def conventional_width(self, layer_index: int) -> int:
        if layer_index == 0:
            return self.source.input_channels
        return self.source.conv_widths[layer_index - 1]

    def node_layers(self, node: HsdNode) -> tuple[LayerSpec, ...]:
        parent = self.nodes[node.parent_id] if node.parent_id is not None else None
        if parent is None:
            return ()
        return block_layers(
            len(parent.channels),
            len(node.channels),
            node.layer_index in self.source.pool_after,
            self.source.use_affine,
        )

    def compute_nodes(self) -> list[ComputeNode]:
        return list(self._compute_nodes)

    @cached_property
    def _compute_nodes(self) -> tuple[ComputeNode, ...]:
        leaf_ids = {leaf.node_id for leaf in self.leaves()}
        out = []
        for node_id in sorted(self.nodes):
            node = self.nodes[node_id]
            head = None
            if node_id in leaf_ids and not node.is_root:
                head = HeadSpec(head_key(node_id), len(node.channels), node.class_set)
            out.append(
                ComputeNode(
                    node_id=node_id,
                    parent_id=node.parent_id,
                    layer_index=node.layer_index,
                    layers=self.node_layers(node),
                    edge_key=edge_key(node.parent_id, node_id) if node.parent_id is not None else "input",
                    head=head,
                )
            )
        return tuple(out)

    def expected_param_shapes(self) -> dict[str, tuple[int, ...]]:
        shapes: dict[str, tuple[int, ...]] = {}
        for node in self.compute_nodes():
            for spec in node.layers:
                for suffix, shape in spec.param_shapes().items():
                    shapes[f"{node.edge_key}.{suffix}"] = shape
            if node.head is not None:
                for suffix, shape in node.head.dense.param_shapes().items():
                    shapes[f"{node.head.key}.{suffix}"] = shape
        return shapes

    def missing_params(self) -> list[str]:
        expected = self.expected_param_shapes()
        return sorted(
            k for k, shape in expected.items() if k not in self.params.tensors or self.params[k].shape != shape
        )

    def is_parameterized(self) -> bool:
        return not self.missing_params()

    def with_params(self, params: ParamStore) -> "HsdTree":
        return replace(self, params=params)


@dataclass
class ValidationReport:
    ok: bool
    violations: list[str]


def validate_tree(tree: HsdTree, subnetwork: bool = False) -> ValidationReport:
    """Check arity, class partition (union and disjointness), leaf partition,
    minimum leaf size, layer indexing and channel ranges. Never raises.

    A full tree's root must hold the whole class list; a ``subnetwork`` root
    may hold any nonempty part of it.
    """
    violations: list[str] = []
    nodes = tree.nodes
    all_classes = set(range(tree.num_classes))

    if ROOT_ID not in nodes or not nodes[ROOT_ID].is_root:
        return ValidationReport(False, [f"missing root node id={ROOT_ID}"])
    roots = [n.node_id for n in nodes.values() if n.is_root]
    if len(roots) != 1:
        violations.append(f"expected one root, found ids={roots}")
    if not subnetwork and set(nodes[ROOT_ID].class_set) != all_classes:
        violations.append(
            f"root holds classes {sorted(nodes[ROOT_ID].class_set)}, expected all {tree.num_classes}"
        )

    for node_id in sorted(nodes):
        node = nodes[node_id]
        if not node.class_set:
            violations.append(f"empty class set at id={node_id}")
        if set(node.class_set) - all_classes:
            violations.append(f"unknown classes {sorted(set(node.class_set) - all_classes)} at id={node_id}")
        if not node.channels.fits(tree.conventional_width(node.layer_index)):
            violations.append(
                f"channel index out of range at id={node_id} (K={tree.conventional_width(node.layer_index)})"
            )
        if node.parent_id is not None:
            parent = nodes.get(node.parent_id)
            if parent is None:
                violations.append(f"dangling parent id={node.parent_id} of id={node_id}")
                continue
            if node.layer_index != parent.layer_index + 1:
                violations.append(
                    f"layer index {node.layer_index} at id={node_id} is not parent's {parent.layer_index} + 1"
                )

        children = tree.children(node_id)
        if len(children) > 2:
            violations.append(f"more than two children at id={node_id}")
        if not children:
            if not node.is_root and len(node.class_set) < 2:
                violations.append(f"leaf id={node_id} has fewer than two classes")
            continue
        child_sets = [set(c.class_set) for c in children]
        if len(child_sets) == 2 and child_sets[0] & child_sets[1]:
            violations.append(
                f"overlap at parent id={node_id}: classes {sorted(child_sets[0] & child_sets[1])}"
            )
        union = set().union(*child_sets)
        if union != set(node.class_set):
            violations.append(
                f"children of parent id={node_id} cover {sorted(union)}, expected {sorted(node.class_set)}"
            )

    leaves = [n for n in tree.leaves() if not n.is_root]
    seen: dict[int, int] = {}
    for leaf in leaves:
        for c in leaf.class_set:
            if c in seen:
                violations.append(f"class {c} in leaves id={seen[c]} and id={leaf.node_id}")
            seen[c] = leaf.node_id
    if leaves and set(seen) != set(nodes[ROOT_ID].class_set):
        violations.append(
            f"leaf class sets cover {sorted(seen)}, root holds {sorted(nodes[ROOT_ID].class_set)}"
        )

    return ValidationReport(not violations, violations)
