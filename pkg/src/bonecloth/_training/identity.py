# Area: Training
# PRD: docs/prd-bonecloth.md
"""
bonecloth._training.identity — Per-identity precomputation
==========================================================

Everything the networks and losses need about one (body, garment) pair
that does not depend on the pose: the virtual-bone rig, the texel map,
garment rest constants, graph scales and the canonical graph. Per-frame
body state (skinning transforms, posed body vertices and SDF) is cached
per pose sequence.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
from scipy.spatial import cKDTree

from ..config import RunConfig
from .._assets.bundle import AssetBundle
from .._geometry.sdf import BodySdf
from .._geometry.uv import TexelMap, build_texel_map
from .._kinematics.body import pose_vertices, posed_body_vertices, posed_sdf
from .._kinematics.poses import PoseSequence
from .._kinematics.rig import BoneRig, build_bone_rig
from .._kinematics.skeleton import skinning_transforms
from .._networks.graph import GraphInputs, GraphScales, canonical_graph
from .._physics.material import GarmentConstants, garment_constants

logger = logging.getLogger("bonecloth.training")


@dataclass(eq=False)
class SequenceFrames:
    """Per-frame skeleton and body state of one pose sequence."""

    poses: PoseSequence
    transforms: np.ndarray
    body_positions: np.ndarray
    _sdfs: Dict[int, BodySdf] = field(default_factory=dict)

    @property
    def frame_count(self) -> int:
        return self.poses.frame_count

    def clamp(self, t: int) -> int:
        return min(max(t, 0), self.frame_count - 1)

    def body_velocity(self, t: int, dt: float) -> np.ndarray:
        """Backward difference (t − 1 → t); zero at frame 0."""
        return (self.body_positions[self.clamp(t)] - self.body_positions[self.clamp(t - 1)]) / dt

    def transforms_window(self, t: int) -> np.ndarray:
        return self.transforms[[self.clamp(t - 2), self.clamp(t - 1), self.clamp(t)]]

    def pose_window(self, t: int) -> np.ndarray:
        return self.poses.window(self.clamp(t)).astype(np.float64)


@dataclass(eq=False)
class Identity:
    name: str
    bundle: AssetBundle
    rig: BoneRig
    texmap: TexelMap
    constants: GarmentConstants
    scales: GraphScales
    kinds: np.ndarray
    pin_weights: np.ndarray
    garment_body_weights: np.ndarray
    graph: GraphInputs
    train: List[SequenceFrames]
    heldout: List[SequenceFrames]

    @property
    def vertex_count(self) -> int:
        return self.bundle.canonical.vertex_count

    def sdf(self, frames: SequenceFrames, t: int) -> BodySdf:
        t = frames.clamp(t)
        if t not in frames._sdfs:
            frames._sdfs[t] = posed_sdf(self.bundle.body, frames.transforms[t])
        return frames._sdfs[t]

    def pinned_positions(self, frames: SequenceFrames, t: int) -> np.ndarray:
        return self.bundle.pinned_positions(frames.transforms[frames.clamp(t)], self.pin_weights)

    def skinned_garment(self, frames: SequenceFrames, t: int) -> np.ndarray:
        """Garment posed with nearest-body-vertex weights (the rollout's starting state)."""
        return pose_vertices(self.garment_body_weights, frames.transforms[frames.clamp(t)], self.bundle.canonical.vertices)


def sequence_frames(bundle: AssetBundle, poses: PoseSequence) -> SequenceFrames:
    skeleton = bundle.body.skeleton
    transforms = np.stack([skinning_transforms(skeleton, pose) for pose in poses.frames])
    body_positions = np.stack([posed_body_vertices(bundle.body, t) for t in transforms])
    return SequenceFrames(poses=poses, transforms=transforms, body_positions=body_positions)


def identity_rig(bundle: AssetBundle, config: RunConfig) -> Tuple[BoneRig, TexelMap]:
    """Virtual-bone rig and texel map on the canonical drape."""
    rig = build_bone_rig(
        bundle.canonical,
        bundle.body,
        config.kinematics.bone_count,
        seed_index=config.geometry.fps_seed_index,
        sigma_scale=config.kinematics.sigma_scale,
        sigma=config.kinematics.sigma,
    )
    texmap = build_texel_map(bundle.canonical, config.geometry.uv_height, config.geometry.uv_width)
    return rig, texmap


def identity_graph(bundle: AssetBundle, config: RunConfig) -> Tuple[GraphInputs, GarmentConstants, GraphScales]:
    """Canonical graph (identity encoder input) with the rest constants and scales it was built with."""
    canonical = bundle.canonical
    body = bundle.body
    constants = garment_constants(bundle.template, config.physics.material.density, bundle.pinned)
    scales = GraphScales(
        length=float(constants.rest_lengths.mean()),
        mass=float(constants.masses.mean()),
        dt=config.physics.dt,
    )
    graph = canonical_graph(
        canonical.vertices,
        canonical.edges,
        bundle.garment_kinds(),
        constants.masses,
        body.mesh.vertices,
        body.mesh.edges,
        config.networks.body_neighbors,
        scales,
    )
    return graph, constants, scales


def prepare_identity(name: str, bundle: AssetBundle, config: RunConfig) -> Identity:
    canonical = bundle.canonical
    body = bundle.body
    rig, texmap = identity_rig(bundle, config)
    graph, constants, scales = identity_graph(bundle, config)
    _, nearest = cKDTree(body.mesh.vertices).query(canonical.vertices)
    logger.info(
        f"Prepared identity {name}: {canonical.vertex_count} garment vertices, "
        f"{rig.bone_count} bones, {len(bundle.train)} training sequences"
    )
    return Identity(
        name=name,
        bundle=bundle,
        rig=rig,
        texmap=texmap,
        constants=constants,
        scales=scales,
        kinds=bundle.garment_kinds(),
        pin_weights=bundle.pin_weights,
        garment_body_weights=body.skin_weights[nearest],
        graph=graph,
        train=[sequence_frames(bundle, s) for s in bundle.train],
        heldout=[sequence_frames(bundle, s) for s in bundle.heldout],
    )
