"""Chain and tree networks, their persistence and DOT export."""

from .chain import ChainNet, NetworkConfig, build_chain, vgg16_config
from .dot import export_dot
from .io import load, load_chain, load_tree, save
from .tree import ChannelSelection, HsdNode, HsdTree, ValidationReport, validate_tree

__all__ = [
    "ChainNet",
    "ChannelSelection",
    "HsdNode",
    "HsdTree",
    "NetworkConfig",
    "ValidationReport",
    "build_chain",
    "export_dot",
    "load",
    "load_chain",
    "load_tree",
    "save",
    "validate_tree",
]
