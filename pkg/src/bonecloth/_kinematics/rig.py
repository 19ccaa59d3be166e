# Area: Kinematics
# PRD: docs/prd-bonecloth.md
"""
bonecloth._kinematics.rig — Virtual bones and the two skinning stages
=====================================================================

Skeleton → bones: each virtual bone is a garment vertex of the canonical
drape, chosen by farthest-point sampling. It inherits the skin weights
of its nearest body vertex and is posed by ordinary LBS.

Bones → garment: every garment vertex blends the corrected bone
transforms with weights Ŵ = softmax(W⁰ + Δw), where W⁰ is a softmax of
negative geodesic distance to each bone:

    p̂_v = Σ_b ŵ_vb [ R̂_b (p_v^c − p_b^c) + q̂_b ]

with R̂_b decoded from (blended bone rotation in 6D + Δr_b) and
q̂_b = p̃_b + Δt_b.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from ..errors import DegenerateInputError, NonFiniteError, ShapeMismatchError
from .._diffcore import ops
from .._diffcore.tape import Tensor, precision
from .._geometry.geodesic import farthest_point_sample, geodesic_matrix
from .._geometry.mesh import TriMesh
from .body import SkinnedBody, pose_vertices
from .rotation6d import apply_flat, encode_6d, rotation_6d_to_matrix_tensor

logger = logging.getLogger("bonecloth.kinematics")


@dataclass(frozen=True, eq=False)
class BoneRig:
    """
    bone_vertices: (B,) garment vertex indices the bones were sampled at
    positions: (B, 3) canonical bone positions p_b^c
    smpl_weights: (B, K) per-bone joint weights, rows sum to 1
    init_weights: (V, B) W⁰, rows sum to 1
    sigma: blur scale of the geodesic softmax (meters)
    canonical: (V, 3) canonical garment vertices p_v^c
    """

    bone_vertices: np.ndarray
    positions: np.ndarray
    smpl_weights: np.ndarray
    init_weights: np.ndarray
    sigma: float
    canonical: np.ndarray
    uniform_rows: np.ndarray

    @property
    def bone_count(self) -> int:
        return len(self.positions)

    @property
    def vertex_count(self) -> int:
        return len(self.canonical)


def weights_from_distances(distances: np.ndarray, sigma: float) -> Tuple[np.ndarray, np.ndarray]:
    """Row softmax of −d/σ; rows with no finite distance become uniform."""
    if not sigma > 0:
        raise DegenerateInputError("init_garment_weights", f"sigma must be positive, got {sigma}")
    d = np.asarray(distances, dtype=np.float64)
    finite = np.isfinite(d)
    unreachable = ~finite.any(axis=1)
    shifted = np.where(finite, d, np.inf) - np.where(unreachable, 0.0, np.min(np.where(finite, d, np.inf), axis=1))[:, None]
    e = np.where(finite, np.exp(-np.where(finite, shifted, 0.0) / sigma), 0.0)
    e[unreachable] = 1.0
    weights = e / e.sum(axis=1, keepdims=True)
    rows = np.flatnonzero(unreachable)
    if rows.size:
        logger.warning(f"{rows.size} garment vertices unreachable from every bone; uniform weights (first {int(rows[0])})")
    return weights, rows


def init_garment_weights(mesh: TriMesh, bones: Sequence[int], sigma: float) -> np.ndarray:
    """W⁰ for bones located at garment vertices *bones*."""
    weights, _ = weights_from_distances(geodesic_matrix(mesh, bones), sigma)
    return weights


def default_sigma(distances: np.ndarray, mesh: TriMesh, scale: float = 0.5) -> float:
    """scale × mean nearest-bone geodesic distance; mean edge length if that is zero."""
    nearest = np.min(distances, axis=1)
    nearest = nearest[np.isfinite(nearest)]
    sigma = scale * float(nearest.mean()) if nearest.size else 0.0
    if not sigma > 0:
        sigma = float(mesh.edge_lengths().mean())
        logger.warning(f"Mean nearest-bone distance is zero; sigma falls back to mean edge length {sigma:.4g}")
    return sigma


def build_bone_rig(
    garment: TriMesh,
    body: SkinnedBody,
    bone_count: int,
    seed_index: Optional[int] = None,
    sigma_scale: float = 0.5,
    sigma: Optional[float] = None,
) -> BoneRig:
    """Sample bones on the canonical drape and derive all rig weights."""
    if seed_index is None:
        seed_index = int(np.argmin(garment.vertices[:, 1]))
    bones = farthest_point_sample(garment.vertices, bone_count, seed_index)
    positions = garment.vertices[bones]
    _, nearest_body = cKDTree(body.mesh.vertices).query(positions)
    smpl_weights = body.skin_weights[nearest_body]
    distances = geodesic_matrix(garment, bones)
    if sigma is None:
        sigma = default_sigma(distances, garment, sigma_scale)
    weights, uniform = weights_from_distances(distances, sigma)
    logger.info(f"Built bone rig: {bone_count} bones, sigma={sigma:.4g} m")
    return BoneRig(
        bone_vertices=bones,
        positions=positions,
        smpl_weights=smpl_weights,
        init_weights=weights,
        sigma=float(sigma),
        canonical=garment.vertices.copy(),
        uniform_rows=uniform,
    )


# ── skeleton → bones ──────────────────────────────────────────


def skin_bones(rig: BoneRig, transforms: np.ndarray) -> np.ndarray:
    """p̃_b = Σ_k w_bk T_k p_b^c for (K, 4, 4) skinning transforms."""
    if transforms.shape != (rig.smpl_weights.shape[1], 4, 4):
        raise ShapeMismatchError("skin_bones", [transforms.shape, (rig.smpl_weights.shape[1], 4, 4)])
    return pose_vertices(rig.smpl_weights, transforms, rig.positions)


def bone_base_6d(rig: BoneRig, transforms: np.ndarray) -> np.ndarray:
    """6D encoding of each bone's blended rotation Σ_k w_bk R_k."""
    blended = np.einsum("bk,kij->bij", rig.smpl_weights, transforms[:, :3, :3])
    return encode_6d(blended)


# ── bones → garment ───────────────────────────────────────────


def correct_weights(init_weights: np.ndarray, delta: np.ndarray) -> np.ndarray:
    """Ŵ = row softmax(W⁰ + Δw)."""
    delta = np.asarray(delta, dtype=np.float64)
    if delta.shape != init_weights.shape:
        raise ShapeMismatchError("correct_weights", [init_weights.shape, delta.shape])
    bad = np.flatnonzero(~np.isfinite(delta).all(axis=1))
    if bad.size:
        raise NonFiniteError("correct_weights", index=int(bad[0]))
    logits = init_weights + delta
    e = np.exp(logits - logits.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def correct_weights_tensor(init_weights: np.ndarray, delta: Tensor) -> Tensor:
    return ops.softmax(ops.add(Tensor(init_weights), delta))


def skin_garment_tensor(
    weights: Tensor,
    base_6d: np.ndarray,
    posed_bones: np.ndarray,
    corrections: Tensor,
    bone_positions: np.ndarray,
    canonical: np.ndarray,
) -> Tensor:
    """
    Differentiable bones → garment LBS.

    weights: (V, B) Ŵ; corrections: (B, 9) = [Δr (6) | Δt (3)].
    """
    count = len(bone_positions)
    if corrections.shape != (count, 9) or weights.shape != (len(canonical), count):
        raise ShapeMismatchError("skin_garment", [weights.shape, corrections.shape], f"(V, {count}) and ({count}, 9)")
    rot_flat = rotation_6d_to_matrix_tensor(ops.add(Tensor(base_6d), ops.slice_last(corrections, 0, 6)))
    q_hat = ops.add(Tensor(posed_bones), ops.slice_last(corrections, 6, 9))
    # Σ_b ŵ R̂_b p_v^c
    blended = ops.matmul(weights, rot_flat)
    rotated = apply_flat(blended, Tensor(canonical))
    # Σ_b ŵ (R̂_b p_b^c − q̂_b)
    offsets = ops.sub(apply_flat(rot_flat, Tensor(bone_positions)), q_hat)
    return ops.sub(rotated, ops.matmul(weights, offsets))


def skin_garment(
    rig: BoneRig,
    weights: np.ndarray,
    transforms: np.ndarray,
    corrections: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Numpy entry point (float64): posed garment vertices (V, 3)."""
    if corrections is None:
        corrections = np.zeros((rig.bone_count, 9))
    with precision("float64"):
        out = skin_garment_tensor(
            Tensor(weights),
            bone_base_6d(rig, transforms),
            skin_bones(rig, transforms),
            Tensor(corrections),
            rig.positions,
            rig.canonical,
        )
    return out.data
