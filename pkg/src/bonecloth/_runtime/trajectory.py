# Area: Runtime
# PRD: docs/prd-bonecloth.md
"""
bonecloth._runtime.trajectory — BTRJ files and per-frame OBJ export
===================================================================

BTRJ layout (little-endian)::

    b"BTRJ"  u32 version  u32 frame_count  u32 vertex_count
    float32 positions (frame_count, vertex_count, 3)
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import FileFormatError, ShapeMismatchError
from .._geometry.mesh import TriMesh, write_obj
from .._shared.binio import F32, PathLike, Reader, atomic_write_bytes, pack_u32

MAGIC = b"BTRJ"
VERSION = 1


def write_trajectory(path: PathLike, positions: np.ndarray) -> None:
    positions = np.ascontiguousarray(positions, dtype=F32)
    if positions.ndim != 3 or positions.shape[2] != 3:
        raise ShapeMismatchError("write_trajectory", [positions.shape], "(T, V, 3)")
    header = MAGIC + pack_u32(VERSION, positions.shape[0], positions.shape[1])
    atomic_write_bytes(path, header + positions.tobytes())


def read_trajectory(path: PathLike) -> np.ndarray:
    """
    Raises:
        FileFormatError: bad magic/version, truncated or oversized payload
    """
    reader = Reader.open(path)
    reader.expect_magic(MAGIC)
    reader.check_version(VERSION)
    frames, vertices = reader.u32(), reader.u32()
    positions = reader.floats((frames, vertices, 3))
    if not reader.exhausted:
        raise FileFormatError(str(path), "trailing bytes after trajectory")
    return positions


def write_obj_frames(directory: PathLike, mesh: TriMesh, positions: np.ndarray) -> None:
    """One ``frame_NNNNN.obj`` per frame with the garment's topology and UVs."""
    root = Path(directory)
    for t, frame in enumerate(positions):
        write_obj(root / f"frame_{t:05d}.obj", mesh.with_vertices(np.asarray(frame, dtype=np.float64)))
