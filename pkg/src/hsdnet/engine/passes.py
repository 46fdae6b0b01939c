"""Forward and reverse-mode passes over chains and trees."""

from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import ShapeMismatchError
from . import ops
from .graph import ComputeNode, Network, param_key, structure_signature
from .specs import LayerKind, LayerSpec


@dataclass
class ForwardResult:
    """Activations, logits and probabilities of one forward pass.

    ``activations[node_id]`` is the map a node hands to its children (after
    any probe scaling). Caches are kept for :func:`backward`.
    """

    activations: dict[int, np.ndarray]
    logits: np.ndarray
    probabilities: np.ndarray
    probes: dict[int, np.ndarray]
    signature: tuple[object, ...]
    input_shape: tuple[int, ...]
    _layer_caches: dict[tuple[int, int], Any] = field(default_factory=dict, repr=False)
    _head_caches: dict[int, tuple[Any, Any]] = field(default_factory=dict, repr=False)
    _pre_probe: dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    def leaf_logits(self, classes: tuple[int, ...] | list[int]) -> np.ndarray:
        return self.logits[:, list(classes)]


@dataclass
class GradientStore:
    """Parameter gradients plus probe gradients (batch-summed and per sample)."""

    params: dict[str, np.ndarray]
    probes: dict[int, np.ndarray] = field(default_factory=dict)
    probes_per_sample: dict[int, np.ndarray] = field(default_factory=dict)


def _layer_forward(
    spec: LayerSpec, h: np.ndarray, owner: str, params: Mapping[str, np.ndarray]
) -> tuple[np.ndarray, Any]:
    kind = spec.kind
    if kind in (LayerKind.CONV3X3, LayerKind.CONV1X1):
        return ops.conv2d_forward(
            h, params[param_key(owner, "weight")], params[param_key(owner, "bias")], spec.padding
        )
    if kind == LayerKind.AFFINE:
        return ops.affine_forward(h, params[param_key(owner, "scale")], params[param_key(owner, "shift")])
    if kind == LayerKind.RELU:
        return ops.relu_forward(h)
    if kind == LayerKind.MAXPOOL2X2:
        return ops.maxpool2x2_forward(h)
    raise ShapeMismatchError(f"layer kind {kind.value} cannot sit on an edge")


_BACKWARD = {
    LayerKind.CONV3X3: ops.conv2d_backward,
    LayerKind.CONV1X1: ops.conv2d_backward,
    LayerKind.AFFINE: ops.affine_backward,
    LayerKind.RELU: ops.relu_backward,
    LayerKind.MAXPOOL2X2: ops.maxpool2x2_backward,
}


def _check_layer_input(node: ComputeNode, position: int, spec: LayerSpec, h: np.ndarray) -> None:
    where = f"node {node.node_id} (layer {node.layer_index}), op {position} {spec.kind.value}"
    if h.ndim != 4:
        raise ShapeMismatchError(f"{where}: expected a 4-d NCHW tensor, got shape {h.shape}")
    if h.shape[1] != spec.in_channels:
        raise ShapeMismatchError(
            f"{where}: expected {spec.in_channels} input channels, got {h.shape[1]}"
        )
    if spec.kind == LayerKind.MAXPOOL2X2 and (h.shape[2] % 2 or h.shape[3] % 2):
        raise ShapeMismatchError(f"{where}: odd spatial extent {h.shape[2:]} reaches a 2x2 pool")


def forward(
    net: Network,
    batch: np.ndarray,
    probe_scales: Mapping[int, np.ndarray] | None = None,
) -> ForwardResult:
    """Run ``net`` on a batch of images.

    ``probe_scales`` maps node ids (the layer index, for chains) to per-channel
    multipliers applied to that node's activation map.
    """
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 4 or tuple(batch.shape[1:]) != tuple(net.input_shape):
        raise ShapeMismatchError(
            f"layer 0: batch shape {batch.shape} does not match input {net.input_shape}"
        )
    nodes = net.compute_nodes()
    by_id = {n.node_id: n for n in nodes}
    probes = {k: np.asarray(v, dtype=np.float64) for k, v in (probe_scales or {}).items()}
    for node_id, scale in probes.items():
        node = by_id.get(node_id)
        if node is None or node.parent_id is None:
            raise ShapeMismatchError(f"layer {node_id}: no probe-able node with this id")
        if scale.shape != (node.out_channels,):
            raise ShapeMismatchError(
                f"layer {node.layer_index}: probe has {scale.shape[0] if scale.ndim else 0} "
                f"entries for {node.out_channels} channels"
            )

    n = batch.shape[0]
    result = ForwardResult(
        activations={},
        logits=np.full((n, net.num_classes), -np.inf),
        probabilities=np.zeros((n, net.num_classes)),
        probes=probes,
        signature=structure_signature(net),
        input_shape=batch.shape,
    )
    params = net.params
    for node in nodes:
        if node.parent_id is None:
            result.activations[node.node_id] = batch
            continue
        h = result.activations[node.parent_id]
        for position, spec in enumerate(node.layers):
            _check_layer_input(node, position, spec, h)
            h, cache = _layer_forward(spec, h, node.edge_key, params)
            result._layer_caches[(node.node_id, position)] = cache
        if node.node_id in probes:
            result._pre_probe[node.node_id] = h
            h = h * probes[node.node_id][None, :, None, None]
        result.activations[node.node_id] = h

        if node.head is not None:
            head = node.head
            if h.shape[1] != head.in_features:
                raise ShapeMismatchError(
                    f"node {node.node_id} (layer {node.layer_index}): head expects "
                    f"{head.in_features} features, got {h.shape[1]}"
                )
            pooled, gap_cache = ops.global_avg_pool_forward(h)
            z, dense_cache = ops.dense_forward(
                pooled, params[param_key(head.key, "weight")], params[param_key(head.key, "bias")]
            )
            result.logits[:, list(head.classes)] = z
            result._head_caches[node.node_id] = (gap_cache, dense_cache)

    result.probabilities = ops.softmax(result.logits)
    return result


def backward(
    net: Network,
    result: ForwardResult,
    grad_logits: np.ndarray | None = None,
    grad_probs: np.ndarray | None = None,
) -> GradientStore:
    """Reverse pass seeded at the logits (or, via softmax, at the probabilities)."""
    if structure_signature(net) != result.signature:
        raise ShapeMismatchError("stale forward result: network structure changed since forward")
    if grad_logits is None:
        if grad_probs is None:
            raise ValueError("backward needs grad_logits or grad_probs")
        grad_logits = ops.softmax_backward(np.asarray(grad_probs, dtype=np.float64), result.probabilities)
    grad_logits = np.asarray(grad_logits, dtype=np.float64)
    if grad_logits.shape != result.logits.shape:
        raise ShapeMismatchError(
            f"output: gradient shape {grad_logits.shape} does not match logits {result.logits.shape}"
        )

    nodes = net.compute_nodes()
    grads = GradientStore(params={})
    upstream: dict[int, np.ndarray] = {}

    def accumulate(node_id: int, g: np.ndarray) -> None:
        if node_id in upstream:
            upstream[node_id] = upstream[node_id] + g
        else:
            upstream[node_id] = g

    for node in reversed(nodes):
        if node.parent_id is None:
            continue
        if node.head is not None:
            gap_cache, dense_cache = result._head_caches[node.node_id]
            dz = grad_logits[:, list(node.head.classes)]
            dpooled, dense_grads = ops.dense_backward(dz, dense_cache)
            for suffix, g in dense_grads.items():
                grads.params[param_key(node.head.key, suffix)] = g
            dh, _ = ops.global_avg_pool_backward(dpooled, gap_cache)
            accumulate(node.node_id, dh)

        dh = upstream.pop(node.node_id, None)
        if dh is None:
            # Dead branch: nothing downstream reads this node
            dh = np.zeros_like(result.activations[node.node_id])

        if node.node_id in result.probes:
            pre = result._pre_probe[node.node_id]
            per_sample = (pre * dh).sum(axis=(2, 3))
            grads.probes_per_sample[node.node_id] = per_sample
            grads.probes[node.node_id] = per_sample.sum(axis=0)
            dh = dh * result.probes[node.node_id][None, :, None, None]

        for position in reversed(range(len(node.layers))):
            spec = node.layers[position]
            dh, layer_grads = _BACKWARD[spec.kind](dh, result._layer_caches[(node.node_id, position)])
            for suffix, g in layer_grads.items():
                key = param_key(node.edge_key, suffix)
                grads.params[key] = grads.params[key] + g if key in grads.params else g

        if node.parent_id != nodes[0].node_id:
            accumulate(node.parent_id, dh)

    return grads
