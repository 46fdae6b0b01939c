"""
Self-describing binary container shared by every hsdnet artifact.

Layout (all integers little-endian)::

    b"HSDT" | version u32 | section*
    section := tag (4 ASCII bytes) | length u64 | payload

Tensor payloads (``PARM``, ``ISCV``, ``DATA``) are
``count u32`` followed by records
``name_len u32 | name | rank u32 | extents u64*rank | float64 data``.
"""

import math
import struct
from pathlib import Path

import numpy as np

from ..errors import ContainerFormatError
from ..utils.logger import get_logger

logger = get_logger(__name__)

MAGIC = b"HSDT"
VERSION = 1
MAX_EXTENT = np.iinfo(np.intp).max // 8


class PayloadReader:
    def __init__(self, data: bytes, what: str) -> None:
        self.data = data
        self.offset = 0
        self.what = what

    def take(self, n: int) -> bytes:
        end = self.offset + n
        if end > len(self.data):
            raise ContainerFormatError(
                f"truncated {self.what}: need {n} bytes at offset {self.offset}, "
                f"only {len(self.data) - self.offset} left"
            )
        chunk = self.data[self.offset : end]
        self.offset = end
        return chunk

    def u32(self) -> int:
        return int(struct.unpack("<I", self.take(4))[0])

    def u64(self) -> int:
        return int(struct.unpack("<Q", self.take(8))[0])

    def u32_list(self) -> tuple[int, ...]:
        count = self.u32()
        return tuple(struct.unpack(f"<{count}I", self.take(4 * count)))

    @property
    def exhausted(self) -> bool:
        return self.offset >= len(self.data)


def encode_tensors(tensors: dict[str, np.ndarray]) -> bytes:
    parts = [struct.pack("<I", len(tensors))]
    for name in sorted(tensors):
        array = np.ascontiguousarray(tensors[name], dtype="<f8")
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<I", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<I", array.ndim))
        parts.append(struct.pack(f"<{array.ndim}Q", *array.shape))
        parts.append(array.tobytes())
    return b"".join(parts)


def decode_tensors(payload: bytes, what: str = "tensor section") -> dict[str, np.ndarray]:
    reader = PayloadReader(payload, what)
    count = reader.u32()
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        name = reader.take(reader.u32()).decode("utf-8")
        rank = reader.u32()
        shape = tuple(reader.u64() for _ in range(rank))
        numel = math.prod(shape)
        if max(shape, default=0) > MAX_EXTENT:
            raise ContainerFormatError(f"{reader.what}: tensor {name!r} has impossible shape {shape}")
        if 8 * numel > len(reader.data) - reader.offset:
            raise ContainerFormatError(
                f"truncated {reader.what}: tensor {name!r} of shape {shape} needs {8 * numel} bytes "
                f"at offset {reader.offset}, only {len(reader.data) - reader.offset} left"
            )
        raw = reader.take(8 * numel)
        tensors[name] = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)
    return tensors


def encode_u32_list(values: list[int] | tuple[int, ...]) -> bytes:
    return struct.pack("<I", len(values)) + struct.pack(f"<{len(values)}I", *values)


def write_container(path: Path | str, sections: list[tuple[bytes, bytes]]) -> None:
    """Write ``(tag, payload)`` sections after the header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    chunks = [MAGIC, struct.pack("<I", VERSION)]
    for tag, payload in sections:
        if len(tag) != 4:
            raise ValueError(f"section tag must be 4 bytes, got {tag!r}")
        chunks.extend([tag, struct.pack("<Q", len(payload)), payload])
    path.write_bytes(b"".join(chunks))
    logger.info(f"Wrote {path} ({', '.join(t.decode() for t, _ in sections)})")


def read_container(path: Path | str) -> dict[bytes, bytes]:
    """Read every section of a container, keyed by tag."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Container not found: {path}")
    reader = PayloadReader(path.read_bytes(), str(path))
    magic = reader.take(4) if len(reader.data) >= 4 else reader.data
    if magic != MAGIC:
        raise ContainerFormatError(f"bad magic in {path}: expected {MAGIC!r}, got {magic!r}")
    version = reader.u32()
    if version != VERSION:
        raise ContainerFormatError(f"unsupported container version {version} in {path}")
    sections: dict[bytes, bytes] = {}
    while not reader.exhausted:
        tag = reader.take(4)
        length = reader.u64()
        sections[tag] = reader.take(length)
    return sections
