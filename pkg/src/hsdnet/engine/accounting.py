"""Parameter and multiply-accumulate counts, read from structure alone."""

from math import prod

from .graph import Network
from .specs import LayerKind


def count_params(net: Network) -> int:
    """Weights plus biases (plus affine scale/shift) of every edge and head."""
    total = 0
    for node in net.compute_nodes():
        for spec in node.layers:
            total += sum(prod(shape) for shape in spec.param_shapes().values())
        if node.head is not None:
            total += sum(prod(shape) for shape in node.head.dense.param_shapes().values())
    return total


def count_macs(net: Network, input_shape: tuple[int, int, int] | None = None) -> int:
    """Multiply-accumulates for one sample.

    A conv contributes ``out * in * kh * kw * outH * outW``, a dense layer
    ``in * out``; biases, activations and pooling are free.
    """
    _, height, width = input_shape or net.input_shape
    nodes = net.compute_nodes()
    extents: dict[int, tuple[int, int]] = {}
    total = 0
    for node in nodes:
        if node.parent_id is None:
            extents[node.node_id] = (height, width)
            continue
        h, w = extents[node.parent_id]
        for spec in node.layers:
            if spec.kind in (LayerKind.CONV3X3, LayerKind.CONV1X1):
                k = spec.kernel_size
                total += spec.out_channels * spec.in_channels * k * k * h * w
            elif spec.kind == LayerKind.MAXPOOL2X2:
                h, w = h // 2, w // 2
        extents[node.node_id] = (h, w)
        if node.head is not None:
            total += node.head.in_features * len(node.head.classes)
    return total
