"""Channel selection, the per-node split rule and breadth-first tree construction."""

from collections import deque
from collections.abc import Iterable, Mapping
from dataclasses import dataclass

import numpy as np

from ..errors import MissingIscvError, ShapeMismatchError, TreeInvariantError
from ..model.chain import ChainNet, NetworkConfig
from ..model.tree import ROOT_ID, ChannelSelection, HsdNode, HsdTree, validate_tree
from ..sensitivity.iscv import IscvMatrix
from ..utils.logger import get_logger
from .policy import DecomposePolicy
from .ward import ward_cluster

logger = get_logger(__name__)


@dataclass(frozen=True)
class ChildSpec:
    class_set: tuple[int, ...]
    channels: ChannelSelection


def select_channels(iscv: IscvMatrix, class_set: Iterable[int], keep_count: int) -> ChannelSelection:
    """Top ``keep_count`` channels by summed normalized score; ties to the lower index."""
    classes = list(class_set)
    if not classes:
        raise ValueError("select_channels needs a nonempty class set")
    if not 1 <= keep_count <= iscv.width:
        raise ValueError(f"keep_count {keep_count} outside 1..{iscv.width}")
    total = iscv.rows(classes).sum(axis=0)
    order = np.lexsort((np.arange(iscv.width), -total))
    return ChannelSelection.of(order[:keep_count])


def _is_full_width(layer_index: int, class_set: tuple[int, ...], num_classes: int, policy: DecomposePolicy) -> bool:
    # The stem reads the raw image; trunk nodes still serve every class
    return layer_index == 1 or (policy.trunk_full_width and len(class_set) == num_classes)


def _node_channels(iscv: IscvMatrix, class_set: tuple[int, ...], policy: DecomposePolicy) -> ChannelSelection:
    if _is_full_width(iscv.layer_index, class_set, iscv.num_classes, policy):
        return ChannelSelection.full(iscv.width)
    return select_channels(iscv, class_set, policy.keep_count(iscv.width))


def _check_partition(children: list[ChildSpec], parent: tuple[int, ...], node_id: int | None) -> None:
    where = f"node id={node_id}" if node_id is not None else "node"
    sets = [set(c.class_set) for c in children]
    if len(sets) == 2 and sets[0] & sets[1]:
        raise TreeInvariantError(f"{where}: children overlap on classes {sorted(sets[0] & sets[1])}")
    if set().union(*sets) != set(parent):
        raise TreeInvariantError(f"{where}: children cover {sorted(set().union(*sets))}, expected {list(parent)}")


def decompose_node(
    iscv: IscvMatrix,
    parent_class_set: Iterable[int],
    policy: DecomposePolicy,
    clustering: bool | None = None,
    node_id: int | None = None,
    config: NetworkConfig | None = None,
) -> list[ChildSpec]:
    """Children of one node at the layer ``iscv`` was measured on.

    At a clustering layer Ward's method may split the class set in two;
    each side then picks its own channels. Elsewhere there is one child
    with the parent's classes. Without an explicit ``clustering`` flag the
    policy decides; automatic layers need the chain's ``config``.
    """
    class_set = tuple(sorted(int(c) for c in parent_class_set))
    unknown = [c for c in class_set if not 0 <= c < iscv.num_classes]
    if unknown:
        raise ValueError(f"classes {unknown} have no Iscv row at layer {iscv.layer_index}")
    if clustering is None:
        if config is None and policy.clustering_layers is None:
            raise ValueError("automatic clustering layers need the network config")
        layers = policy.resolve_layers(config) if config is not None else policy.clustering_layers
        clustering = iscv.layer_index in (layers or ())

    groups = [class_set]
    if clustering and len(class_set) >= 2:
        result = ward_cluster(iscv.rows(class_set), class_set, policy.min_classes_per_node)
        if not result.merged_to_single:
            groups = [result.left, result.right]
            logger.debug(
                f"Split at layer {iscv.layer_index}: {list(result.left)} | {list(result.right)}"
            )

    children = [ChildSpec(g, _node_channels(iscv, g, policy)) for g in groups]
    _check_partition(children, class_set, node_id)
    return children


def required_iscv_layers(chain: ChainNet, policy: DecomposePolicy) -> list[int]:
    """Layers whose Iscv :func:`build_hsd` may read under ``policy``."""
    clustering = policy.resolve_layers(chain.config)
    layers = set(clustering)
    if policy.trunk_full_width:
        if clustering:
            layers.update(range(max(2, min(clustering)), chain.depth + 1))
    else:
        layers.update(range(2, chain.depth + 1))
    return sorted(layers)


def build_hsd(
    chain: ChainNet,
    iscv_map: Mapping[int, IscvMatrix],
    policy: DecomposePolicy | None = None,
) -> HsdTree:
    """Grow the tree layout breadth-first; edges are left empty for transfer."""
    policy = policy or DecomposePolicy()
    clustering = set(policy.resolve_layers(chain.config))
    missing = [l for l in required_iscv_layers(chain, policy) if l not in iscv_map]
    if missing:
        raise MissingIscvError(f"no Iscv for layers {missing}; compute them before decomposing")
    for l, matrix in iscv_map.items():
        if 1 <= l <= chain.depth and matrix.scores.shape != (chain.num_classes, chain.width(l)):
            raise ShapeMismatchError(
                f"layer {l}: Iscv shape {matrix.scores.shape} does not match "
                f"{chain.num_classes} classes x {chain.width(l)} channels"
            )

    all_classes = tuple(range(chain.num_classes))
    nodes = {
        ROOT_ID: HsdNode(ROOT_ID, 0, None, all_classes, ChannelSelection.full(chain.width(0)))
    }
    queue = deque([ROOT_ID])
    next_id = ROOT_ID + 1
    while queue:
        parent = nodes[queue.popleft()]
        layer = parent.layer_index + 1
        if layer > chain.depth:
            continue
        iscv = iscv_map.get(layer)
        if iscv is None:
            # Only full-width trunk pass-through reaches here
            children = [ChildSpec(parent.class_set, ChannelSelection.full(chain.width(layer)))]
        else:
            children = decompose_node(
                iscv, parent.class_set, policy, clustering=layer in clustering, node_id=parent.node_id
            )
        for child in children:
            nodes[next_id] = HsdNode(next_id, layer, parent.node_id, child.class_set, child.channels)
            queue.append(next_id)
            next_id += 1

    tree = HsdTree(source=chain.config, nodes=nodes)
    report = validate_tree(tree)
    if not report.ok:
        raise TreeInvariantError("; ".join(report.violations))
    leaves = tree.leaves()
    logger.info(
        f"Built tree layout: {len(nodes)} nodes, {len(leaves)} leaves "
        f"{[list(leaf.class_set) for leaf in leaves]}"
    )
    return tree
