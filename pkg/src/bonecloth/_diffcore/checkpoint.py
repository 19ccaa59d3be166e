# Area: Diffcore
# PRD: docs/prd-bonecloth.md
"""
bonecloth._diffcore.checkpoint — BNCK parameter files
=====================================================

Layout (little-endian):

    b"BNCK"  u32 version  u32 record_count
    repeated: u32 name_len  name (UTF-8)  u32 rank  u32 dims[rank]  f32 data

Records are written in the order given, so saving the same mapping twice
yields identical bytes.
"""

from __future__ import annotations

import logging
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from ..errors import FileFormatError
from .._shared.binio import PathLike, Reader, atomic_write_bytes, pack_array, pack_u32

logger = logging.getLogger("bonecloth.diffcore")

MAGIC = b"BNCK"
VERSION = 1


def save_checkpoint(path: PathLike, arrays: Mapping[str, np.ndarray]) -> None:
    chunks = [MAGIC, pack_u32(VERSION, len(arrays))]
    for name, array in arrays.items():
        encoded = name.encode("utf-8")
        chunks.append(pack_u32(len(encoded)))
        chunks.append(encoded)
        chunks.append(pack_array(np.asarray(array)))
    atomic_write_bytes(path, b"".join(chunks))
    logger.debug(f"Wrote checkpoint {path} ({len(arrays)} records)")


def load_checkpoint(
    path: PathLike,
    expected: Optional[Mapping[str, Tuple[int, ...]]] = None,
) -> Dict[str, np.ndarray]:
    """
    Read a checkpoint, optionally validating names and shapes.

    Raises:
        FileFormatError: bad magic/version, truncation, a missing expected
            record or a shape that differs from *expected*
    """
    reader = Reader.open(path)
    reader.expect_magic(MAGIC)
    reader.check_version(VERSION)
    count = reader.u32()
    arrays: Dict[str, np.ndarray] = {}
    for _ in range(count):
        name_len = reader.u32()
        try:
            name = reader.take(name_len).decode("utf-8")
        except UnicodeDecodeError:
            raise FileFormatError(str(path), "record name is not UTF-8") from None
        arrays[name] = reader.array()
    if not reader.exhausted:
        raise FileFormatError(str(path), "trailing bytes after last record")
    if expected is not None:
        for name, shape in expected.items():
            if name not in arrays:
                raise FileFormatError(str(path), f"missing parameter '{name}'")
            if arrays[name].shape != tuple(shape):
                raise FileFormatError(
                    str(path),
                    f"parameter '{name}' has shape {arrays[name].shape}, expected {tuple(shape)}",
                )
    return arrays
