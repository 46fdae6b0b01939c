"""Retraining-free subnetworks: the root-to-leaf paths that serve a class subset."""

from collections.abc import Iterable

from ..errors import TreeInvariantError
from ..model.tree import HsdNode, HsdTree, edge_key, head_key, validate_tree
from ..utils.logger import get_logger

logger = get_logger(__name__)


def leaf_paths(tree: HsdTree) -> dict[int, list[int]]:
    """Node ids from the root down to each leaf, keyed by leaf id."""
    return {
        leaf.node_id: [n.node_id for n in tree.path_to_root(leaf.node_id)]
        for leaf in tree.leaves()
        if not leaf.is_root
    }


def extract_subnetwork(tree: HsdTree, class_subset: Iterable[int]) -> HsdTree:
    """Keep the paths to every leaf whose classes meet ``class_subset``.

    Node ids, channel selections and parameter tensors are kept as they are;
    class sets shrink to the classes of the kept leaves.
    """
    subset = {int(c) for c in class_subset}
    if not subset:
        raise ValueError("class subset must be nonempty")
    unknown = sorted(c for c in subset if not 0 <= c < tree.num_classes)
    if unknown:
        raise ValueError(f"classes {unknown} are not in the class list of {tree.num_classes}")

    paths = leaf_paths(tree)
    kept_leaves = [leaf_id for leaf_id in paths if subset & set(tree.nodes[leaf_id].class_set)]
    kept_ids = sorted({node_id for leaf_id in kept_leaves for node_id in paths[leaf_id]})
    covered = {c for leaf_id in kept_leaves for c in tree.nodes[leaf_id].class_set}

    nodes: dict[int, HsdNode] = {}
    owners: set[str] = set()
    for node_id in kept_ids:
        node = tree.nodes[node_id]
        nodes[node_id] = HsdNode(
            node_id=node_id,
            layer_index=node.layer_index,
            parent_id=node.parent_id,
            class_set=tuple(c for c in node.class_set if c in covered),
            channels=node.channels,
        )
        if node.parent_id is not None:
            owners.add(edge_key(node.parent_id, node_id))
    owners.update(head_key(leaf_id) for leaf_id in kept_leaves)

    sub = HsdTree(source=tree.source, nodes=nodes, params=tree.params.restricted(owners))
    report = validate_tree(sub, subnetwork=True)
    if not report.ok:
        raise TreeInvariantError("; ".join(report.violations))
    logger.info(
        f"Extracted subnetwork for classes {sorted(subset)}: {len(kept_leaves)} leaves, "
        f"{len(nodes)} of {len(tree.nodes)} nodes"
    )
    return sub


def path_subnetwork(tree: HsdTree, leaf_id: int) -> HsdTree:
    """The single root-to-leaf path ending at ``leaf_id``."""
    if leaf_id not in leaf_paths(tree):
        raise ValueError(f"node id={leaf_id} is not a leaf")
    return extract_subnetwork(tree, tree.nodes[leaf_id].class_set)
