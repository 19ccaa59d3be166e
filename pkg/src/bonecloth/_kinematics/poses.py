# Area: Kinematics
# PRD: docs/prd-bonecloth.md
"""
bonecloth._kinematics.poses — Pose sequences and the BPOS file
==============================================================

BPOS layout (little-endian): b"BPOS", u32 version, u32 K, u32 frames,
f64 Δt, then frames × K × 6 float32 local 6D rotations.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import AssetValidationError, FileFormatError, ShapeMismatchError
from .._shared.binio import PathLike, Reader, atomic_write_bytes, pack_u32

MAGIC = b"BPOS"
VERSION = 1


@dataclass(frozen=True, eq=False)
class PoseSequence:
    """frames: (T, K, 6) float32; dt: seconds between frames."""

    frames: np.ndarray
    dt: float

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float32)
        if frames.ndim != 3 or frames.shape[2] != 6:
            raise ShapeMismatchError("PoseSequence", [frames.shape], "(T, K, 6)")
        if not self.dt > 0:
            raise AssetValidationError(f"Frame interval must be positive, got {self.dt}", operation=type(self).__name__)
        object.__setattr__(self, "frames", frames)

    @property
    def frame_count(self) -> int:
        return self.frames.shape[0]

    @property
    def joint_count(self) -> int:
        return self.frames.shape[1]

    def window(self, t: int) -> np.ndarray:
        """The (3, K, 6) window ending at frame t; earlier frames clamp to 0."""
        idx = [max(t - 2, 0), max(t - 1, 0), t]
        return self.frames[idx]


@dataclass(frozen=True, eq=False)
class PoseWindow:
    """Three consecutive frames (θ^{t−2}, θ^{t−1}, θ^t) and Δt."""

    frames: np.ndarray
    dt: float

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 3 or frames.shape[0] != 3 or frames.shape[2] != 6:
            raise ShapeMismatchError("PoseWindow", [frames.shape], "(3, K, 6)")
        if not self.dt > 0:
            raise AssetValidationError(f"Frame interval must be positive, got {self.dt}", operation=type(self).__name__)
        object.__setattr__(self, "frames", frames)


def write_poses(path: PathLike, seq: PoseSequence) -> None:
    header = MAGIC + pack_u32(VERSION, seq.joint_count, seq.frame_count) + struct.pack("<d", seq.dt)
    atomic_write_bytes(path, header + np.ascontiguousarray(seq.frames, dtype="<f4").tobytes())


def read_poses(path: PathLike, joint_count: Optional[int] = None) -> PoseSequence:
    """
    Raises:
        FileFormatError: bad header, truncated data or a joint count
            different from *joint_count*
    """
    reader = Reader.open(path)
    reader.expect_magic(MAGIC)
    reader.check_version(VERSION)
    k = reader.u32()
    frames = reader.u32()
    dt = reader.f64()
    if joint_count is not None and k != joint_count:
        raise FileFormatError(str(path), f"pose file has {k} joints, body has {joint_count}")
    if not dt > 0:
        raise FileFormatError(str(path), f"non-positive frame interval {dt}")
    data = reader.floats((frames, k, 6))
    if not reader.exhausted:
        raise FileFormatError(str(path), "trailing bytes after last frame")
    return PoseSequence(frames=data, dt=dt)
