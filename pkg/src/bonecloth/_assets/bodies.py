# Area: Assets
# PRD: docs/prd-bonecloth.md
"""
bonecloth._assets.bodies — Procedural capsule bodies
====================================================

Each body is a small skeleton (identity rest rotations, so world rest
positions are cumulative offsets) plus a set of capsules, each riding one
joint rigidly. The surface mesh is the union of tessellated capsules;
every surface vertex is skinned entirely to its capsule's joint.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from ..errors import AssetValidationError
from .._geometry.mesh import TriMesh
from .._kinematics.body import SkinnedBody
from .._kinematics.skeleton import Skeleton

# tessellation of one capsule: segments around, rings per hemisphere, rings along the cylinder
SEGMENTS = 10
CAP_RINGS = 3
BODY_RINGS = 4


@dataclass(frozen=True)
class JointSpec:
    name: str
    parent: int
    position: Tuple[float, float, float]


@dataclass(frozen=True)
class CapsuleSpec:
    joint: int
    start: Tuple[float, float, float]
    end: Tuple[float, float, float]
    radius: float


def _frame(axis: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    helper = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    a = np.cross(axis, helper)
    a /= np.linalg.norm(a)
    return a, np.cross(axis, a)


def capsule_mesh(start, end, radius: float, segments: int = SEGMENTS) -> Tuple[np.ndarray, np.ndarray]:
    """Closed triangle mesh of a capsule: (vertices, faces)."""
    start = np.asarray(start, dtype=np.float64)
    end = np.asarray(end, dtype=np.float64)
    axis = end - start
    length = np.linalg.norm(axis)
    axis = axis / length if length > 0 else np.array([0.0, 1.0, 0.0])
    a, b = _frame(axis)
    # (center offset along axis, ring radius) from the start pole to the end pole
    rings = []
    for i in range(1, CAP_RINGS + 1):
        angle = np.pi / 2 * (1 - i / (CAP_RINGS + 1))
        rings.append((start - axis * radius * np.sin(angle), radius * np.cos(angle)))
    for i in range(BODY_RINGS):
        rings.append((start + axis * length * i / max(BODY_RINGS - 1, 1), radius))
    for i in range(1, CAP_RINGS + 1):
        angle = np.pi / 2 * i / (CAP_RINGS + 1)
        rings.append((end + axis * radius * np.sin(angle), radius * np.cos(angle)))
    theta = 2 * np.pi * np.arange(segments) / segments
    around = np.outer(np.cos(theta), a) + np.outer(np.sin(theta), b)
    vertices = [start - axis * radius]
    for center, r in rings:
        vertices.extend(center + r * around)
    vertices.append(end + axis * radius)
    vertices = np.asarray(vertices)

    faces: List[Tuple[int, int, int]] = []
    top = len(vertices) - 1
    for j in range(segments):
        jn = (j + 1) % segments
        faces.append((0, 1 + jn, 1 + j))
    for r in range(len(rings) - 1):
        base, nxt = 1 + r * segments, 1 + (r + 1) * segments
        for j in range(segments):
            jn = (j + 1) % segments
            faces.append((base + j, base + jn, nxt + j))
            faces.append((base + jn, nxt + jn, nxt + j))
    last = 1 + (len(rings) - 1) * segments
    for j in range(segments):
        jn = (j + 1) % segments
        faces.append((last + j, last + jn, top))
    return vertices, np.asarray(faces, dtype=np.int64)


def assemble_body(joints: Sequence[JointSpec], capsules: Sequence[CapsuleSpec]) -> SkinnedBody:
    """Skeleton + tessellated capsule union with rigid per-capsule weights."""
    positions = np.array([j.position for j in joints], dtype=np.float64)
    parents = np.array([j.parent for j in joints], dtype=np.int64)
    translations = positions.copy()
    for k, p in enumerate(parents):
        if p >= 0:
            translations[k] = positions[k] - positions[p]
    skeleton = Skeleton(
        names=tuple(j.name for j in joints),
        parents=parents,
        rest_rotations=np.tile(np.eye(3), (len(joints), 1, 1)),
        rest_translations=translations,
    )
    all_vertices, all_faces, weights = [], [], []
    offset = 0
    for cap in capsules:
        if not 0 <= cap.joint < len(joints):
            raise AssetValidationError(f"capsule joint {cap.joint} out of range", operation="assemble_body")
        v, f = capsule_mesh(cap.start, cap.end, cap.radius)
        all_vertices.append(v)
        all_faces.append(f + offset)
        w = np.zeros((len(v), len(joints)))
        w[:, cap.joint] = 1.0
        weights.append(w)
        offset += len(v)
    faces = np.concatenate(all_faces)
    mesh = TriMesh(np.concatenate(all_vertices), faces, np.zeros((len(faces), 3, 2)))
    return SkinnedBody(
        skeleton=skeleton,
        mesh=mesh,
        skin_weights=np.concatenate(weights),
        capsule_joints=np.array([c.joint for c in capsules]),
        capsule_starts=np.array([c.start for c in capsules]),
        capsule_ends=np.array([c.end for c in capsules]),
        capsule_radii=np.array([c.radius for c in capsules]),
    )


# ── rigs ──────────────────────────────────────────────────────

BAR_Y = 1.2
BAR_RADIUS = 0.02


def bar_body(half_width: float) -> SkinnedBody:
    """A horizontal bar hanging from a pivot 0.4 m above it (one joint)."""
    joints = [JointSpec("pivot", -1, (0.0, BAR_Y + 0.4, 0.0))]
    capsules = [CapsuleSpec(0, (-half_width - 0.05, BAR_Y, 0.0), (half_width + 0.05, BAR_Y, 0.0), BAR_RADIUS)]
    return assemble_body(joints, capsules)


ARM_Y = 1.3
ARM_RADIUS = 0.045


def swing_arm_body() -> SkinnedBody:
    """Torso with one horizontal arm along +x: torso, shoulder, elbow."""
    joints = [
        JointSpec("torso", -1, (0.0, 1.0, 0.0)),
        JointSpec("shoulder", 0, (0.17, ARM_Y, 0.0)),
        JointSpec("elbow", 1, (0.45, ARM_Y, 0.0)),
    ]
    capsules = [
        CapsuleSpec(0, (0.0, 0.75, 0.0), (0.0, 1.35, 0.0), 0.12),
        CapsuleSpec(1, (0.17, ARM_Y, 0.0), (0.45, ARM_Y, 0.0), ARM_RADIUS),
        CapsuleSpec(2, (0.45, ARM_Y, 0.0), (0.72, ARM_Y, 0.0), 0.04),
    ]
    return assemble_body(joints, capsules)


def _lower_body() -> Tuple[List[JointSpec], List[CapsuleSpec]]:
    joints = [
        JointSpec("pelvis", -1, (0.0, 1.0, 0.0)),
        JointSpec("spine", 0, (0.0, 1.1, 0.0)),
        JointSpec("left_hip", 0, (0.1, 0.95, 0.0)),
        JointSpec("left_knee", 2, (0.1, 0.53, 0.0)),
        JointSpec("right_hip", 0, (-0.1, 0.95, 0.0)),
        JointSpec("right_knee", 4, (-0.1, 0.53, 0.0)),
    ]
    capsules = [
        CapsuleSpec(0, (-0.08, 0.98, 0.0), (0.08, 0.98, 0.0), 0.11),
        CapsuleSpec(1, (0.0, 1.08, 0.0), (0.0, 1.4, 0.0), 0.13),
        CapsuleSpec(2, (0.1, 0.95, 0.0), (0.1, 0.53, 0.0), 0.07),
        CapsuleSpec(3, (0.1, 0.53, 0.0), (0.1, 0.1, 0.0), 0.05),
        CapsuleSpec(4, (-0.1, 0.95, 0.0), (-0.1, 0.53, 0.0), 0.07),
        CapsuleSpec(5, (-0.1, 0.53, 0.0), (-0.1, 0.1, 0.0), 0.05),
    ]
    return joints, capsules


def lower_body() -> SkinnedBody:
    joints, capsules = _lower_body()
    return assemble_body(joints, capsules)


def biped_body() -> SkinnedBody:
    """Lower body plus arms hanging in an A-pose."""
    joints, capsules = _lower_body()
    for side, sign in (("left", 1.0), ("right", -1.0)):
        shoulder = len(joints)
        joints.append(JointSpec(f"{side}_shoulder", 1, (0.2 * sign, 1.45, 0.0)))
        joints.append(JointSpec(f"{side}_elbow", shoulder, (0.3 * sign, 1.2, 0.0)))
        capsules.append(CapsuleSpec(shoulder, (0.2 * sign, 1.45, 0.0), (0.3 * sign, 1.2, 0.0), 0.045))
        capsules.append(CapsuleSpec(shoulder + 1, (0.3 * sign, 1.2, 0.0), (0.38 * sign, 0.95, 0.0), 0.04))
    return assemble_body(joints, capsules)
