# Area: Physics
# PRD: docs/prd-bonecloth.md
"""
bonecloth._physics.losses — Differentiable physics and consistency losses
=========================================================================

Physics terms (supervise the dynamics teacher):

    stretch    (k_s/2)(|e| − ℓ)²           mean over edges
    bend       (k_b/2)(θ − θ_rest)²        mean over interior edges
    collision  (k_c/3) max(0, m − d)³      mean over vertices
    inertia    |p − (2p' − p'' + gΔt²)|²   mean over vertices
    friction   μ |tangential slip|          mean over vertices, contacts only

Consistency terms (supervise the fast branch against the teacher):

    mse        |p_A − p_C|²                 mean over vertices
    laplacian  |p − mean(one-ring)|²         mean over vertices
    interp     max(0, ε − d)²                mean over vertices

``reduction="sum"`` replaces the mean by a sum; the drape solver uses it
to turn energies into per-vertex forces.
"""

from __future__ import annotations

from typing import Dict, Literal, Optional

import numpy as np
import scipy.sparse as sp

from ..errors import ShapeMismatchError
from .._diffcore import ops
from .._diffcore.tape import Tensor
from .._geometry.sdf import BodySdf, signed_distance, signed_distance_tensor

Reduction = Literal["mean", "sum"]


def _reduce(values: Tensor, reduction: Reduction) -> Tensor:
    if values.data.size == 0:
        return Tensor(np.zeros(()))
    return ops.mean(values) if reduction == "mean" else ops.sum(values)


def edge_vectors(positions: Tensor, pairs: np.ndarray, a: int = 0, b: int = 1) -> Tensor:
    return ops.sub(ops.gather_rows(positions, pairs[:, b]), ops.gather_rows(positions, pairs[:, a]))


def loss_stretch(
    positions: Tensor,
    edges: np.ndarray,
    rest_lengths: np.ndarray,
    k_s: float,
    reduction: Reduction = "mean",
) -> Tensor:
    length = ops.norm(edge_vectors(positions, edges))
    strain = ops.sub(length, Tensor(rest_lengths))
    return ops.scale(_reduce(ops.square(strain), reduction), 0.5 * k_s)


def dihedral_tensor(positions: Tensor, stencils: np.ndarray) -> Tensor:
    """atan2((n1 × n2)·ê, n1·n2) for each (i, j, k, l) stencil."""
    xi = ops.gather_rows(positions, stencils[:, 0])
    e = ops.sub(ops.gather_rows(positions, stencils[:, 1]), xi)
    to_k = ops.sub(ops.gather_rows(positions, stencils[:, 2]), xi)
    to_l = ops.sub(ops.gather_rows(positions, stencils[:, 3]), xi)
    n1 = ops.cross(e, to_k)
    n2 = ops.cross(to_l, e)
    e_hat = ops.div(e, ops.reshape(ops.norm(e), (len(stencils), 1)))
    return ops.atan2(ops.dot(ops.cross(n1, n2), e_hat), ops.dot(n1, n2))


def loss_bend(
    positions: Tensor,
    stencils: np.ndarray,
    rest_angles: np.ndarray,
    k_b: float,
    reduction: Reduction = "mean",
) -> Tensor:
    if len(stencils) == 0:
        return Tensor(np.zeros(()))
    delta = ops.sub(dihedral_tensor(positions, stencils), Tensor(rest_angles))
    return ops.scale(_reduce(ops.square(delta), reduction), 0.5 * k_b)


def loss_collision(
    positions: Tensor,
    sdf: BodySdf,
    k_c: float,
    margin: float,
    reduction: Reduction = "mean",
) -> Tensor:
    depth = ops.relu(ops.sub(Tensor(np.full(positions.shape[0], margin)), signed_distance_tensor(sdf, positions)))
    return ops.scale(_reduce(ops.mul(depth, ops.square(depth)), reduction), k_c / 3.0)


def inertia_target(
    previous: Tensor,
    previous2: Tensor,
    gravity_step: Optional[np.ndarray] = None,
) -> Tensor:
    """2p' − p'' (+ g Δt² on unsupported vertices)."""
    target = ops.sub(ops.scale(previous, 2.0), previous2)
    if gravity_step is not None:
        target = ops.add(target, Tensor(gravity_step))
    return target


def gravity_offsets(
    gravity: np.ndarray,
    dt: float,
    vertex_count: int,
    supported: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Per-vertex g Δt², zero on supported (pinned or in-contact) vertices."""
    step = np.tile(np.asarray(gravity, dtype=np.float64) * dt * dt, (vertex_count, 1))
    if supported is not None:
        step[np.asarray(supported, dtype=bool)] = 0.0
    return step


def loss_inertia(
    positions: Tensor,
    previous: Tensor,
    previous2: Tensor,
    gravity_step: Optional[np.ndarray] = None,
) -> Tensor:
    if not positions.shape == previous.shape == previous2.shape:
        raise ShapeMismatchError("loss_inertia", [positions.shape, previous.shape, previous2.shape])
    deviation = ops.sub(positions, inertia_target(previous, previous2, gravity_step))
    return ops.mean(ops.sum(ops.square(deviation), axis=-1))


def loss_friction(
    positions: Tensor,
    previous: Tensor,
    sdf: BodySdf,
    mu: float,
    margin: float,
) -> Tensor:
    """μ × mean tangential displacement of vertices within the contact margin."""
    anchor = previous.data.astype(np.float64)
    in_contact = signed_distance(sdf, anchor) < margin
    if not in_contact.any():
        return Tensor(np.zeros(()))
    contact = np.flatnonzero(in_contact)
    normals = sdf.gradient(anchor[contact])
    slip = ops.sub(ops.gather_rows(positions, contact), ops.gather_rows(previous, contact))
    normal_part = ops.mul(Tensor(normals), ops.reshape(ops.dot(slip, Tensor(normals)), (len(contact), 1)))
    tangential = ops.norm(ops.sub(slip, normal_part), eps=1e-16)
    return ops.scale(ops.sum(tangential), mu / len(contact))


def loss_mse(p_a: Tensor, p_c: Tensor) -> Tensor:
    if p_a.shape != p_c.shape:
        raise ShapeMismatchError("loss_mse", [p_a.shape, p_c.shape])
    return ops.mean(ops.sum(ops.square(ops.sub(p_a, p_c)), axis=-1))


def loss_laplacian(positions: Tensor, laplacian: sp.csr_matrix) -> Tensor:
    residual = ops.spmm(laplacian, positions)
    return ops.mean(ops.sum(ops.square(residual), axis=-1))


def loss_interp(positions: Tensor, sdf: BodySdf, epsilon: float) -> Tensor:
    depth = ops.relu(ops.sub(Tensor(np.full(positions.shape[0], epsilon)), signed_distance_tensor(sdf, positions)))
    return ops.mean(ops.square(depth))


def weighted_total(terms: Dict[str, Tensor], weights: Dict[str, float]) -> Tensor:
    """Σ λ_name · term_name over the terms present."""
    total = None
    for name, value in terms.items():
        weight = weights.get(name, 0.0)
        if weight == 0.0:
            continue
        scaled = ops.scale(value, weight)
        total = scaled if total is None else ops.add(total, scaled)
    return Tensor(np.zeros(())) if total is None else total


def physics_terms(
    positions: Tensor,
    previous: Tensor,
    previous2: Tensor,
    constants,
    sdf: BodySdf,
    material,
    gravity_step: Optional[np.ndarray] = None,
) -> Dict[str, Tensor]:
    """The five physics terms for one integrated frame."""
    return {
        "stretch": loss_stretch(positions, constants.edges, constants.rest_lengths, material.stretch_stiffness),
        "bend": loss_bend(positions, constants.bend_stencils, constants.rest_angles, material.bend_stiffness),
        "collision": loss_collision(positions, sdf, material.collision_stiffness, material.collision_margin),
        "inertia": loss_inertia(positions, previous, previous2, gravity_step),
        "friction": loss_friction(positions, previous, sdf, material.friction, material.collision_margin),
    }
