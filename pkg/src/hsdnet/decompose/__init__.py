"""Turning a trained chain plus its Iscv into a tree layout."""

from .builder import ChildSpec, build_hsd, decompose_node, required_iscv_layers, select_channels
from .policy import DecomposePolicy
from .ward import ClusterResult, ward_cluster

__all__ = [
    "ChildSpec",
    "ClusterResult",
    "DecomposePolicy",
    "build_hsd",
    "decompose_node",
    "required_iscv_layers",
    "select_channels",
    "ward_cluster",
]
