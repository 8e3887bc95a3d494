"""Binary checkpoint container.

Layout (little-endian): magic "SDCK", u32 version, u32 header length,
UTF-8 JSON header, u32 tensor count, then per tensor u16 name length,
name, u32 ndim, u32 dims, f64 payload.
"""
import json
import struct
from pathlib import Path

import numpy as np
from nnkit.constants import (
    CHECKPOINT_MAGIC,
    CHECKPOINT_VERSION,
)
from nnkit.exceptions import CheckpointFormatError


def save_container(path: str | Path, header: dict, tensors: dict[str, np.ndarray]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    chunks = [
        CHECKPOINT_MAGIC,
        struct.pack("<II", CHECKPOINT_VERSION, len(header_bytes)),
        header_bytes,
        struct.pack("<I", len(tensors)),
    ]
    for name, value in tensors.items():
        value = np.asarray(value, dtype="<f8")
        encoded = name.encode("utf-8")
        chunks.append(struct.pack("<H", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack(f"<I{value.ndim}I", value.ndim, *value.shape))
        chunks.append(value.tobytes(order="C"))
    path.write_bytes(b"".join(chunks))
    return path


class _Reader:
    def __init__(self, raw: bytes):
        self.raw = raw
        self.offset = 0

    def take(self, size: int, what: str) -> bytes:
        if self.offset + size > len(self.raw):
            raise CheckpointFormatError(f"Truncated checkpoint reading {what}", self.offset)
        chunk = self.raw[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str, what: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def load_container(path: str | Path) -> tuple[dict, dict[str, np.ndarray]]:
    reader = _Reader(Path(path).read_bytes())
    if reader.take(4, "magic") != CHECKPOINT_MAGIC:
        raise CheckpointFormatError("Not a checkpoint file: bad magic", 0)
    version, header_length = reader.unpack("<II", "header")
    if version != CHECKPOINT_VERSION:
        raise CheckpointFormatError(f"Unsupported checkpoint version {version}", 4)
    header_offset = reader.offset
    try:
        header = json.loads(reader.take(header_length, "header").decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointFormatError(f"Malformed checkpoint header: {e}", header_offset) from e

    (count,) = reader.unpack("<I", "tensor count")
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_length,) = reader.unpack("<H", "tensor name")
        name_offset = reader.offset
        try:
            name = reader.take(name_length, "tensor name").decode("utf-8")
        except UnicodeDecodeError as e:
            raise CheckpointFormatError(f"Malformed tensor name: {e}", name_offset) from e
        (ndim,) = reader.unpack("<I", f"shape of {name}")
        shape = reader.unpack(f"<{ndim}I", f"shape of {name}")
        size = int(np.prod(shape, dtype=np.int64)) * 8
        payload = reader.take(size, f"payload of {name}")
        tensors[name] = np.frombuffer(payload, dtype="<f8").reshape(shape).astype(np.float64)
    if reader.offset != len(reader.raw):
        raise CheckpointFormatError("Trailing bytes after last tensor", reader.offset)
    return header, tensors
