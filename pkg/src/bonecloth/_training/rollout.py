# Area: Training
# PRD: docs/prd-bonecloth.md
"""
bonecloth._training.rollout — Dynamics-teacher rollouts
=======================================================

A rollout starts from the garment skinned to the body (nearest body
vertex weights) at frames s−2, s−1, s with finite-difference velocity,
then repeats: build the frame graph → predict acceleration → symplectic
Euler → override pinned vertices with their body attachment → physics
terms on the integrated frame. Works with or without an active tape.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..config import RunConfig
from .._diffcore import ops
from .._diffcore.tape import Tensor
from .._geometry.sdf import BodySdf, signed_distance
from .._networks.dynamics import dynamics_step
from .._networks.graph import GraphInputs, dynamic_graph
from .._networks.model import GarmentModel
from .._physics.integrator import SimState, integrate_tensor
from .._physics.losses import gravity_offsets, physics_terms, weighted_total
from .identity import Identity, SequenceFrames

PHYSICS_TERMS = ("stretch", "bend", "collision", "inertia", "friction")


@dataclass(eq=False)
class TeacherHistory:
    """Positions at t−2, t−1, t, the velocity at t and the matching graphs."""

    positions: List[Tensor]
    velocity: Tensor
    graphs: List[GraphInputs]
    t: int

    def state(self) -> SimState:
        return SimState(
            positions=self.positions[-1].data.astype(np.float64),
            velocities=self.velocity.data.astype(np.float64),
            previous=self.positions[-2].data.astype(np.float64),
            previous2=self.positions[-3].data.astype(np.float64),
        )


@dataclass(eq=False)
class RolloutResult:
    positions: List[Tensor]
    frames: List[int]
    terms: Dict[str, Tensor]
    loss: Tensor
    history: TeacherHistory


def physics_weights(config: RunConfig) -> Dict[str, float]:
    w = config.physics.weights
    return {"stretch": w.stretch, "bend": w.bend, "collision": w.collision, "inertia": w.inertia, "friction": w.friction}


def _next_velocity(identity: Identity, frames: SequenceFrames, t: int, current: np.ndarray, dt: float) -> np.ndarray:
    """Prescribed velocity t → t+1: pinned vertices only, zero elsewhere."""
    out = np.zeros((identity.vertex_count, 3))
    pinned = identity.constants.pinned
    if pinned.size:
        out[pinned] = (identity.pinned_positions(frames, t + 1) - current[pinned]) / dt
    return out


def gravity_step(identity: Identity, sdf: BodySdf, current: np.ndarray, config: RunConfig) -> Optional[np.ndarray]:
    """Gravity offsets of the inertia target; zero for pinned and body-contact vertices."""
    if not config.physics.gravity_in_inertia:
        return None
    supported = signed_distance(sdf, np.asarray(current, dtype=np.float64)) < config.physics.material.collision_margin
    supported[identity.constants.pinned] = True
    return gravity_offsets(np.asarray(config.physics.gravity), config.physics.dt, identity.vertex_count, supported)


def frame_graph(
    identity: Identity,
    frames: SequenceFrames,
    t: int,
    positions: Tensor,
    velocity: Tensor,
    config: RunConfig,
) -> GraphInputs:
    dt = config.physics.dt
    bundle = identity.bundle
    return dynamic_graph(
        positions,
        velocity,
        _next_velocity(identity, frames, t, positions.data.astype(np.float64), dt),
        bundle.canonical.vertices,
        bundle.canonical.edges,
        identity.kinds,
        identity.constants.masses,
        frames.body_positions[frames.clamp(t)],
        frames.body_velocity(t, dt),
        frames.body_velocity(t + 1, dt),
        bundle.body.mesh.vertices,
        bundle.body.mesh.edges,
        config.networks.proximity_radius,
        identity.scales,
    )


def start_history(identity: Identity, frames: SequenceFrames, start: int, config: RunConfig) -> TeacherHistory:
    dt = config.physics.dt
    raw = [identity.skinned_garment(frames, start + k) for k in (-2, -1, 0)]
    pinned = identity.constants.pinned
    for k, p in zip((-2, -1, 0), raw):
        if pinned.size:
            p[pinned] = identity.pinned_positions(frames, start + k)
    velocities = [np.zeros_like(raw[0]), (raw[1] - raw[0]) / dt, (raw[2] - raw[1]) / dt]
    positions = [Tensor(p) for p in raw]
    graphs = [
        frame_graph(identity, frames, start + k, Tensor(p), Tensor(v), config)
        for k, p, v in zip((-2, -1), raw[:2], velocities[:2])
    ]
    return TeacherHistory(positions=positions, velocity=Tensor(velocities[2]), graphs=graphs, t=start)


def step_teacher(
    model: GarmentModel,
    identity: Identity,
    frames: SequenceFrames,
    history: TeacherHistory,
    config: RunConfig,
) -> Tuple[TeacherHistory, Dict[str, Tensor]]:
    """Advance one frame; returns the new history and the physics terms of the new frame."""
    dt = config.physics.dt
    t = history.t
    current = history.positions[-1]
    graph = frame_graph(identity, frames, t, current, history.velocity, config)
    graphs = (history.graphs + [graph])[-3:]
    accel = dynamics_step(model.dynamics, graphs, identity.scales)
    positions, velocity = integrate_tensor(current, history.velocity, accel, dt)

    pinned = identity.constants.pinned
    count = identity.vertex_count
    if pinned.size:
        keep = np.ones((count, 1))
        keep[pinned] = 0.0
        target = np.zeros((count, 3))
        target[pinned] = identity.pinned_positions(frames, t + 1)
        target_v = np.zeros((count, 3))
        target_v[pinned] = (target[pinned] - current.data[pinned].astype(np.float64)) / dt
        positions = ops.add(ops.mul(positions, Tensor(keep)), Tensor(target))
        velocity = ops.add(ops.mul(velocity, Tensor(keep)), Tensor(target_v))

    sdf = identity.sdf(frames, t + 1)
    terms = physics_terms(
        positions,
        current,
        history.positions[-2],
        identity.constants,
        sdf,
        config.physics.material,
        gravity_step(identity, sdf, current.data, config),
    )
    new_history = TeacherHistory(
        positions=history.positions[1:] + [positions],
        velocity=velocity,
        graphs=graphs[1:],
        t=t + 1,
    )
    return new_history, terms


def mean_terms(per_frame: List[Dict[str, Tensor]]) -> Dict[str, Tensor]:
    out: Dict[str, Tensor] = {}
    for name in per_frame[0]:
        total = per_frame[0][name]
        for terms in per_frame[1:]:
            total = ops.add(total, terms[name])
        out[name] = ops.scale(total, 1.0 / len(per_frame))
    return out


def rollout_teacher(
    model: GarmentModel,
    identity: Identity,
    frames: SequenceFrames,
    start: int,
    length: int,
    config: RunConfig,
) -> RolloutResult:
    """Integrate *length* frames after *start*; the physics loss is the mean over those frames."""
    history = start_history(identity, frames, start, config)
    positions, indices, per_frame = [], [], []
    for _ in range(length):
        history, terms = step_teacher(model, identity, frames, history, config)
        positions.append(history.positions[-1])
        indices.append(history.t)
        per_frame.append(terms)
    terms = mean_terms(per_frame)
    return RolloutResult(
        positions=positions,
        frames=indices,
        terms=terms,
        loss=weighted_total(terms, physics_weights(config)),
        history=history,
    )
