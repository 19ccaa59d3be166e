# Area: Kinematics
# PRD: docs/prd-bonecloth.md
"""
bonecloth._kinematics.skeleton — Joint hierarchy and forward kinematics
=======================================================================

World_k = World_parent(k) · Rest_k · Rot(pose_k); the root's parent is
the identity. Poses are (K, 6) local rotations in the 6D encoding.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..errors import AssetValidationError, ShapeMismatchError
from .rotation6d import rotation_6d_to_matrix

logger = logging.getLogger("bonecloth.kinematics")

IDENTITY_6D = np.array([1.0, 0.0, 0.0, 0.0, 1.0, 0.0])


@dataclass(frozen=True, eq=False)
class Skeleton:
    """
    names: K joint names
    parents: (K,) int, -1 for the root, parent < child
    rest_rotations: (K, 3, 3) local rest rotations
    rest_translations: (K, 3) local rest offsets (meters)
    """

    names: Tuple[str, ...]
    parents: np.ndarray
    rest_rotations: np.ndarray
    rest_translations: np.ndarray

    def __post_init__(self):
        parents = np.asarray(self.parents, dtype=np.int64).reshape(-1)
        rot = np.asarray(self.rest_rotations, dtype=np.float64).reshape(-1, 3, 3)
        trans = np.asarray(self.rest_translations, dtype=np.float64).reshape(-1, 3)
        k = len(parents)
        if len(self.names) != k or len(rot) != k or len(trans) != k:
            raise AssetValidationError("skeleton arrays disagree on joint count", operation="Skeleton")
        for j, p in enumerate(parents):
            if not (p < j and (p >= 0 or j == 0)) or (j == 0 and p != -1):
                raise AssetValidationError(
                    f"joint {j} has parent {p}; parents must precede children and only joint 0 is a root",
                    operation="Skeleton",
                )
        gram = np.einsum("kji,kjl->kil", rot, rot)
        if np.abs(gram - np.eye(3)).max(initial=0.0) > 1e-6:
            raise AssetValidationError("rest rotations are not orthonormal", operation="Skeleton")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "parents", parents)
        object.__setattr__(self, "rest_rotations", rot)
        object.__setattr__(self, "rest_translations", trans)

    @property
    def joint_count(self) -> int:
        return len(self.parents)

    def identity_pose(self) -> np.ndarray:
        return np.tile(IDENTITY_6D, (self.joint_count, 1))


def rigid(rotation: np.ndarray, translation: np.ndarray) -> np.ndarray:
    t = np.eye(4)
    t[:3, :3] = rotation
    t[:3, 3] = translation
    return t


def pose_skeleton(skel: Skeleton, pose: np.ndarray) -> np.ndarray:
    """World transforms (K, 4, 4) for a (K, 6) local pose."""
    pose = np.asarray(pose, dtype=np.float64)
    if pose.shape != (skel.joint_count, 6):
        raise ShapeMismatchError("pose_skeleton", [pose.shape, (skel.joint_count, 6)])
    local_rot = rotation_6d_to_matrix(pose)
    world = np.empty((skel.joint_count, 4, 4))
    for k in range(skel.joint_count):
        local = rigid(skel.rest_rotations[k] @ local_rot[k], skel.rest_translations[k])
        parent = skel.parents[k]
        world[k] = local if parent < 0 else world[parent] @ local
    return world


def rest_world(skel: Skeleton) -> np.ndarray:
    return pose_skeleton(skel, skel.identity_pose())


def skinning_transforms(skel: Skeleton, pose: np.ndarray) -> np.ndarray:
    """T_k = G_k(θ) · G_k(0)⁻¹: maps rest-pose world points to posed ones."""
    posed = pose_skeleton(skel, pose)
    return posed @ np.linalg.inv(rest_world(skel))


def joint_positions(world: np.ndarray) -> np.ndarray:
    return world[:, :3, 3].copy()
