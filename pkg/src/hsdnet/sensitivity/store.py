"""Iscv persistence: one ``ISCV`` tensor section plus a ``META`` record."""

from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ValidationError

from ..engine.container import decode_tensors, encode_tensors, read_container, write_container
from ..errors import ContainerFormatError
from .iscv import IscvMatrix


class IscvMeta(BaseModel):
    kind: Literal["iscv"] = "iscv"
    class_list: tuple[str, ...]
    absent: dict[int, tuple[int, ...]]


def save_iscv(matrices: dict[int, IscvMatrix], path: Path | str) -> None:
    if not matrices:
        raise ValueError("no Iscv matrices to save")
    class_list = next(iter(matrices.values())).class_list
    meta = IscvMeta(class_list=class_list, absent={l: m.absent for l, m in matrices.items()})
    tensors = {}
    for l, m in matrices.items():
        tensors[f"layer{l}.scores"] = m.scores
        tensors[f"layer{l}.raw"] = m.raw_scores
    write_container(
        path, [(b"META", meta.model_dump_json().encode("utf-8")), (b"ISCV", encode_tensors(tensors))]
    )


def load_iscv(path: Path | str) -> dict[int, IscvMatrix]:
    sections = read_container(path)
    if b"ISCV" not in sections or b"META" not in sections:
        raise ContainerFormatError(f"{path}: not an Iscv file (needs META and ISCV sections)")
    try:
        meta = IscvMeta.model_validate_json(sections[b"META"])
    except ValidationError as e:
        raise ContainerFormatError(f"{path}: unreadable META section: {e}") from e
    tensors = decode_tensors(sections[b"ISCV"], f"{path} ISCV section")
    out: dict[int, IscvMatrix] = {}
    for l in sorted(meta.absent):
        try:
            scores, raw = tensors[f"layer{l}.scores"], tensors[f"layer{l}.raw"]
        except KeyError as e:
            raise ContainerFormatError(f"{path}: missing tensor {e} for layer {l}") from e
        out[l] = IscvMatrix(l, scores, raw, meta.absent[l], meta.class_list)
    return out
