# Area: Shared
# PRD: docs/prd-bonecloth.md
"""
bonecloth._shared.binio — Binary record helpers and atomic writes
=================================================================

All binary formats (BNCK, BIDC, BPOS, BTRJ) are little-endian with
uint32 counts and float32 payloads. Files are written to a temporary
sibling and renamed into place so readers never see partial output.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from ..errors import FileFormatError

PathLike = Union[str, os.PathLike]

F32 = np.dtype("<f4")


def atomic_write_bytes(path: PathLike, payload: bytes) -> None:
    """Write *payload* to *path* via write-temp-then-rename."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent)
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp_name, target)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def atomic_write_text(path: PathLike, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def pack_u32(*values: int) -> bytes:
    return struct.pack(f"<{len(values)}I", *values)


def pack_array(array: np.ndarray) -> bytes:
    """Shape header (rank, dims) followed by the float32 payload."""
    data = np.ascontiguousarray(array, dtype=F32)
    return pack_u32(data.ndim, *data.shape) + data.tobytes()


class Reader:
    """Sequential reader over a bytes buffer with format errors naming the file."""

    def __init__(self, payload: bytes, path: PathLike):
        self.payload = payload
        self.path = str(path)
        self.offset = 0

    @classmethod
    def open(cls, path: PathLike) -> "Reader":
        with open(path, "rb") as f:
            return cls(f.read(), path)

    @property
    def exhausted(self) -> bool:
        return self.offset >= len(self.payload)

    def take(self, count: int) -> bytes:
        end = self.offset + count
        if end > len(self.payload):
            raise FileFormatError(self.path, f"truncated at byte {self.offset}")
        chunk = self.payload[self.offset:end]
        self.offset = end
        return chunk

    def expect_magic(self, magic: bytes) -> None:
        found = self.take(len(magic))
        if found != magic:
            raise FileFormatError(self.path, f"bad magic {found!r}, expected {magic!r}")

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self.take(8))[0]

    def floats(self, shape: Tuple[int, ...]) -> np.ndarray:
        count = int(np.prod(shape, dtype=np.int64))
        raw = self.take(count * F32.itemsize)
        return np.frombuffer(raw, dtype=F32).reshape(shape).astype(np.float32)

    def array(self) -> np.ndarray:
        rank = self.u32()
        shape = tuple(self.u32() for _ in range(rank))
        return self.floats(shape)

    def check_version(self, supported: int) -> int:
        version = self.u32()
        if version != supported:
            raise FileFormatError(self.path, f"unsupported version {version}")
        return version
