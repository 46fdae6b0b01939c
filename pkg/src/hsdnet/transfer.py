"""
Filling an empty tree layout with sliced chain parameters.

Each edge (parent p -> child v at layer l) takes the chain's layer-l
filters restricted to v's output channels O and p's channels I. Leaf heads
take the chain head's rows for the leaf's classes and columns for its
channels.
"""

from dataclasses import dataclass

import numpy as np

from .engine.graph import ParamStore, param_key
from .errors import ShapeMismatchError, TreeInvariantError
from .model.chain import HEAD_KEY, ChainNet, conv_key
from .model.tree import ChannelSelection, HsdTree, edge_key, head_key
from .utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class SlicePlan:
    edge: str
    out_selection: ChannelSelection
    in_selection: ChannelSelection


def transfer_edge(
    filters: np.ndarray, bias: np.ndarray, plan: SlicePlan
) -> tuple[np.ndarray, np.ndarray]:
    """``out[o, i] = filters[O[o], I[i]]`` and ``bias[o] = bias[O[o]]`` (copies)."""
    k_out, k_in = filters.shape[:2]
    if not plan.out_selection.fits(k_out):
        raise ShapeMismatchError(
            f"{plan.edge}: output channels {list(plan.out_selection.indices)} exceed {k_out}"
        )
    if not plan.in_selection.fits(k_in):
        raise ShapeMismatchError(
            f"{plan.edge}: input channels {list(plan.in_selection.indices)} exceed {k_in}"
        )
    out_idx = list(plan.out_selection.indices)
    in_idx = list(plan.in_selection.indices)
    return filters[np.ix_(out_idx, in_idx)].copy(), bias[out_idx].copy()


def transfer_all(chain: ChainNet, tree: HsdTree) -> HsdTree:
    """Parameterize every edge and leaf head of ``tree`` from ``chain``."""
    if tree.source != chain.config:
        raise ShapeMismatchError("tree layout was not built from this chain's architecture")
    if len(tree.params):
        raise ValueError("tree already carries parameters; transfer expects an empty layout")

    src = chain.params
    tensors: dict[str, np.ndarray] = {}
    for node_id in sorted(tree.nodes):
        node = tree.nodes[node_id]
        if node.parent_id is None:
            continue
        parent = tree.nodes[node.parent_id]
        layer = conv_key(node.layer_index)
        key = edge_key(parent.node_id, node_id)
        plan = SlicePlan(key, node.channels, parent.channels)
        w, b = transfer_edge(src[param_key(layer, "weight")], src[param_key(layer, "bias")], plan)
        tensors[param_key(key, "weight")] = w
        tensors[param_key(key, "bias")] = b
        if chain.config.use_affine:
            out_idx = list(node.channels.indices)
            tensors[param_key(key, "scale")] = src[param_key(layer, "scale")][out_idx].copy()
            tensors[param_key(key, "shift")] = src[param_key(layer, "shift")][out_idx].copy()

    head_w, head_b = src[param_key(HEAD_KEY, "weight")], src[param_key(HEAD_KEY, "bias")]
    for leaf in tree.leaves():
        if leaf.is_root:
            continue
        rows, cols = list(leaf.class_set), list(leaf.channels.indices)
        tensors[param_key(head_key(leaf.node_id), "weight")] = head_w[np.ix_(rows, cols)].copy()
        tensors[param_key(head_key(leaf.node_id), "bias")] = head_b[rows].copy()

    filled = tree.with_params(ParamStore(tensors))
    unfilled = filled.missing_params()
    if unfilled:
        raise TreeInvariantError(f"edges left unfilled after transfer: {unfilled}")
    logger.info(f"Transferred {len(tensors)} tensors into {len(tree.nodes) - 1} edges")
    return filled
