"""Save and load chains and trees in the shared container format."""

import struct
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ValidationError

from ..engine.container import (
    PayloadReader,
    decode_tensors,
    encode_tensors,
    encode_u32_list,
    read_container,
    write_container,
)
from ..engine.graph import ParamStore
from ..errors import ContainerFormatError
from ..utils.logger import get_logger
from .chain import ChainNet, NetworkConfig
from .tree import ChannelSelection, HsdNode, HsdTree

logger = get_logger(__name__)

NO_PARENT = 0xFFFFFFFF


class ModelMeta(BaseModel):
    kind: Literal["chain", "tree"]
    config: NetworkConfig


def encode_topology(tree: HsdTree) -> bytes:
    parts = [struct.pack("<I", len(tree.nodes))]
    for node_id in sorted(tree.nodes):
        node = tree.nodes[node_id]
        parent = NO_PARENT if node.parent_id is None else node.parent_id
        parts.append(struct.pack("<III", node.node_id, parent, node.layer_index))
        parts.append(encode_u32_list(sorted(node.class_set)))
        parts.append(encode_u32_list(node.channels.indices))
    return b"".join(parts)


def decode_topology(payload: bytes) -> dict[int, HsdNode]:
    reader = PayloadReader(payload, "TOPO section")
    nodes: dict[int, HsdNode] = {}
    for _ in range(reader.u32()):
        node_id, parent, layer_index = reader.u32(), reader.u32(), reader.u32()
        class_set = reader.u32_list()
        channels = reader.u32_list()
        nodes[node_id] = HsdNode(
            node_id=node_id,
            layer_index=layer_index,
            parent_id=None if parent == NO_PARENT else parent,
            class_set=class_set,
            channels=ChannelSelection(channels),
        )
    return nodes


def save(model: ChainNet | HsdTree, path: Path | str) -> None:
    """Write a chain or tree; floats are stored bit-exactly."""
    kind: Literal["chain", "tree"] = "chain" if isinstance(model, ChainNet) else "tree"
    config = model.config if isinstance(model, ChainNet) else model.source
    meta = ModelMeta(kind=kind, config=config)
    sections = [(b"META", meta.model_dump_json().encode("utf-8"))]
    if isinstance(model, HsdTree):
        sections.append((b"TOPO", encode_topology(model)))
    sections.append((b"PARM", encode_tensors(model.params.tensors)))
    write_container(path, sections)


def load(path: Path | str) -> ChainNet | HsdTree:
    """Read back what :func:`save` wrote."""
    sections = read_container(path)
    for tag in (b"META", b"PARM"):
        if tag not in sections:
            raise ContainerFormatError(f"{path}: missing {tag.decode()} section")
    try:
        meta = ModelMeta.model_validate_json(sections[b"META"])
    except ValidationError as e:
        raise ContainerFormatError(f"{path}: unreadable META section: {e}") from e
    params = ParamStore(decode_tensors(sections[b"PARM"], f"{path} PARM section"))
    if meta.kind == "chain":
        return ChainNet(config=meta.config, params=params)
    if b"TOPO" not in sections:
        raise ContainerFormatError(f"{path}: tree file without TOPO section")
    return HsdTree(source=meta.config, nodes=decode_topology(sections[b"TOPO"]), params=params)


def load_chain(path: Path | str) -> ChainNet:
    model = load(path)
    if not isinstance(model, ChainNet):
        raise ContainerFormatError(f"{path} holds a tree, expected a chain")
    return model


def load_tree(path: Path | str) -> HsdTree:
    model = load(path)
    if not isinstance(model, HsdTree):
        raise ContainerFormatError(f"{path} holds a chain, expected a tree")
    return model
