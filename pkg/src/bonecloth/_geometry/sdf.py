# Area: Geometry
# PRD: docs/prd-bonecloth.md
"""
bonecloth._geometry.sdf — Capsule-union signed distance
=======================================================

The body is approximated by a union of capsules (segment a→b, radius r).
Distance to one capsule is ``|p − c| − r`` with c the closest point on
the segment; the union takes the minimum. Negative inside.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..errors import DegenerateInputError
from .._diffcore import ops
from .._diffcore.tape import Tensor


@dataclass(frozen=True, eq=False)
class BodySdf:
    """Capsules posed for one frame: starts (N, 3), ends (N, 3), radii (N,)."""

    starts: np.ndarray
    ends: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        starts = np.asarray(self.starts, dtype=np.float64).reshape(-1, 3)
        ends = np.asarray(self.ends, dtype=np.float64).reshape(-1, 3)
        radii = np.asarray(self.radii, dtype=np.float64).reshape(-1)
        if not (len(starts) == len(ends) == len(radii)) or len(radii) == 0:
            raise DegenerateInputError("BodySdf", "capsule arrays must be nonempty and equally long")
        bad = np.flatnonzero(radii <= 0)
        if bad.size:
            raise DegenerateInputError("BodySdf", "capsule radius must be positive", index=int(bad[0]))
        object.__setattr__(self, "starts", starts)
        object.__setattr__(self, "ends", ends)
        object.__setattr__(self, "radii", radii)

    @property
    def capsule_count(self) -> int:
        return len(self.radii)

    def closest(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Signed distance, winning capsule index and closest axis point
        for each query point.
        """
        p = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        axis = self.ends - self.starts
        length_sq = np.einsum("ij,ij->i", axis, axis)
        rel = p[:, None, :] - self.starts[None, :, :]
        t = np.einsum("pni,ni->pn", rel, axis) / np.where(length_sq > 0, length_sq, 1.0)
        t = np.clip(np.where(length_sq > 0, t, 0.0), 0.0, 1.0)
        nearest = self.starts[None] + t[..., None] * axis[None]
        dist = np.linalg.norm(p[:, None, :] - nearest, axis=2) - self.radii[None]
        winner = np.argmin(dist, axis=1)
        rows = np.arange(len(p))
        return dist[rows, winner], winner, nearest[rows, winner]

    def gradient(self, points: np.ndarray) -> np.ndarray:
        """Unit outward direction of the SDF (zero on a capsule axis)."""
        p = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        _, _, axis_point = self.closest(p)
        offset = p - axis_point
        norm = np.linalg.norm(offset, axis=1, keepdims=True)
        return np.where(norm > 0, offset / np.where(norm > 0, norm, 1.0), 0.0)


def signed_distance(sdf: BodySdf, points: np.ndarray) -> np.ndarray:
    """Signed distance of each point to the capsule union (meters)."""
    dist, _, _ = sdf.closest(points)
    return dist


def signed_distance_tensor(sdf: BodySdf, positions: Tensor) -> Tensor:
    """Differentiable SDF over (V, 3) positions; the body is constant."""
    p = positions.data.astype(np.float64)
    dist, _, axis_point = sdf.closest(p)
    offset = p - axis_point
    norm = np.linalg.norm(offset, axis=1, keepdims=True)
    direction = np.where(norm > 0, offset / np.where(norm > 0, norm, 1.0), 0.0)

    def backward(g):
        return ((g[:, None] * direction).astype(g.dtype),)

    return ops.custom(dist, (positions,), backward, "signed_distance")
