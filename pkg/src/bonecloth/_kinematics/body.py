# Area: Kinematics
# PRD: docs/prd-bonecloth.md
"""
bonecloth._kinematics.body — Skinned capsule bodies and their asset file
========================================================================

Body asset JSON layout::

    {
      "format": "bonecloth-body", "version": 1,
      "joints": [{"name", "parent", "rest_rotation_6d", "rest_translation"}],
      "vertices": [[x, y, z], ...],
      "faces": [[i, j, k], ...],
      "skin_weights": [[w_0 .. w_K-1], ...],       # row-major, |V_b| rows
      "capsules": [{"joint", "start", "end", "radius"}]   # rest-pose world
    }

Each capsule follows one joint rigidly: its endpoints are posed with
that joint's skinning transform, giving the per-frame BodySdf.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np

from ..errors import AssetValidationError
from .._geometry.mesh import TriMesh
from .._geometry.sdf import BodySdf
from .._shared.binio import PathLike, atomic_write_text
from .rotation6d import encode_6d, rotation_6d_to_matrix
from .skeleton import Skeleton

logger = logging.getLogger("bonecloth.kinematics")

BODY_FORMAT = "bonecloth-body"
BODY_VERSION = 1


@dataclass(frozen=True, eq=False)
class SkinnedBody:
    """Skeleton, rest-pose surface, per-vertex skin weights and capsules."""

    skeleton: Skeleton
    mesh: TriMesh
    skin_weights: np.ndarray
    capsule_joints: np.ndarray
    capsule_starts: np.ndarray
    capsule_ends: np.ndarray
    capsule_radii: np.ndarray

    def __post_init__(self):
        weights = np.asarray(self.skin_weights, dtype=np.float64)
        k = self.skeleton.joint_count
        if weights.shape != (self.mesh.vertex_count, k):
            raise AssetValidationError(
                f"skin weights must be ({self.mesh.vertex_count}, {k}), got {weights.shape}",
                operation="SkinnedBody",
            )
        if (weights < 0).any() or np.abs(weights.sum(axis=1) - 1.0).max(initial=0.0) > 1e-6:
            raise AssetValidationError("skin weight rows must be nonnegative and sum to 1", operation="SkinnedBody")
        joints = np.asarray(self.capsule_joints, dtype=np.int64).reshape(-1)
        if joints.size and (joints.min() < 0 or joints.max() >= k):
            raise AssetValidationError("capsule joint index out of range", operation="SkinnedBody")
        object.__setattr__(self, "skin_weights", weights)
        object.__setattr__(self, "capsule_joints", joints)
        object.__setattr__(self, "capsule_starts", np.asarray(self.capsule_starts, dtype=np.float64).reshape(-1, 3))
        object.__setattr__(self, "capsule_ends", np.asarray(self.capsule_ends, dtype=np.float64).reshape(-1, 3))
        object.__setattr__(self, "capsule_radii", np.asarray(self.capsule_radii, dtype=np.float64).reshape(-1))

    @property
    def joint_count(self) -> int:
        return self.skeleton.joint_count


def _apply(transforms: np.ndarray, points: np.ndarray) -> np.ndarray:
    return np.einsum("nij,nj->ni", transforms[:, :3, :3], points) + transforms[:, :3, 3]


def pose_vertices(weights: np.ndarray, transforms: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Linear blend skinning of rest-pose *points* with (N, K) *weights*."""
    blended = (weights @ transforms.reshape(len(transforms), 16)).reshape(-1, 4, 4)
    return _apply(blended, points)


def posed_body_vertices(body: SkinnedBody, transforms: np.ndarray) -> np.ndarray:
    return pose_vertices(body.skin_weights, transforms, body.mesh.vertices)


def posed_sdf(body: SkinnedBody, transforms: np.ndarray) -> BodySdf:
    """Capsule union for one frame from the (K, 4, 4) skinning transforms."""
    per_capsule = transforms[body.capsule_joints]
    return BodySdf(
        starts=_apply(per_capsule, body.capsule_starts),
        ends=_apply(per_capsule, body.capsule_ends),
        radii=body.capsule_radii,
    )


def rest_sdf(body: SkinnedBody) -> BodySdf:
    return BodySdf(body.capsule_starts, body.capsule_ends, body.capsule_radii)


# ── asset IO ──────────────────────────────────────────────────


def body_to_dict(body: SkinnedBody) -> dict:
    skel = body.skeleton
    return {
        "format": BODY_FORMAT,
        "version": BODY_VERSION,
        "joints": [
            {
                "name": skel.names[k],
                "parent": int(skel.parents[k]),
                "rest_rotation_6d": encode_6d(skel.rest_rotations[k]).tolist(),
                "rest_translation": skel.rest_translations[k].tolist(),
            }
            for k in range(skel.joint_count)
        ],
        "vertices": body.mesh.vertices.tolist(),
        "faces": body.mesh.faces.tolist(),
        "skin_weights": body.skin_weights.tolist(),
        "capsules": [
            {
                "joint": int(body.capsule_joints[c]),
                "start": body.capsule_starts[c].tolist(),
                "end": body.capsule_ends[c].tolist(),
                "radius": float(body.capsule_radii[c]),
            }
            for c in range(len(body.capsule_radii))
        ],
    }


def body_from_dict(data: dict, source: str = "<body>") -> SkinnedBody:
    """
    Raises:
        AssetValidationError: wrong format tag/version or missing keys
    """
    if data.get("format") != BODY_FORMAT or data.get("version") != BODY_VERSION:
        raise AssetValidationError(f"{source}: not a version {BODY_VERSION} body asset", operation="read_body")
    try:
        joints = data["joints"]
        skeleton = Skeleton(
            names=tuple(j["name"] for j in joints),
            parents=np.array([j["parent"] for j in joints]),
            rest_rotations=rotation_6d_to_matrix(np.array([j["rest_rotation_6d"] for j in joints])),
            rest_translations=np.array([j["rest_translation"] for j in joints]),
        )
        faces = np.asarray(data["faces"], dtype=np.int64).reshape(-1, 3)
        mesh = TriMesh(np.asarray(data["vertices"]).reshape(-1, 3), faces, np.zeros((len(faces), 3, 2)))
        capsules = data["capsules"]
        return SkinnedBody(
            skeleton=skeleton,
            mesh=mesh,
            skin_weights=np.asarray(data["skin_weights"]),
            capsule_joints=np.array([c["joint"] for c in capsules], dtype=np.int64),
            capsule_starts=np.array([c["start"] for c in capsules]),
            capsule_ends=np.array([c["end"] for c in capsules]),
            capsule_radii=np.array([c["radius"] for c in capsules]),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise AssetValidationError(f"{source}: malformed body asset ({e})", operation="read_body") from None


def write_body(path: PathLike, body: SkinnedBody) -> None:
    atomic_write_text(path, json.dumps(body_to_dict(body), indent=1) + "\n")


def read_body(path: PathLike) -> SkinnedBody:
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise AssetValidationError(f"Body asset not found: {path}", operation="read_body") from None
    except json.JSONDecodeError as e:
        raise AssetValidationError(f"{path}: invalid JSON ({e})", operation="read_body") from None
    body = body_from_dict(data, str(path))
    logger.debug(f"Read body {path}: {body.joint_count} joints, {body.mesh.vertex_count} vertices")
    return body
