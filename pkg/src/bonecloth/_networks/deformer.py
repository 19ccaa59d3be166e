# Area: Networks
# PRD: docs/prd-bonecloth.md
"""
bonecloth._networks.deformer — Pose deformer
============================================

Stage 1: skeleton → bones LBS, Bone-Net corrections, bones → garment LBS.
Stage 2: rasterize the Stage-1 positions (relative to the posed bone
centroid) into UV space next to F_UV and the pose embedding φ, run the
Conv-MLP and add the sampled δp back per vertex.

The map is stateless: its output depends only on the identity inputs and
the last three poses.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..errors import ShapeMismatchError
from .._diffcore import ops
from .._diffcore.params import ParamStore
from .._diffcore.tape import Tensor
from .._geometry.uv import TexelMap
from .._kinematics.rig import BoneRig, bone_base_6d, skin_bones, skin_garment_tensor
from .bone_net import BoneNet, FilmParams, bone_net_forward
from .conv_mlp import ConvMLP, PoseEmbedding, conv_mlp_forward
from .layers import broadcast_rows


@dataclass(frozen=True, eq=False)
class DeformerOutput:
    stage1: Tensor
    positions: Tensor
    corrections: Tensor


def bone_window(rig: BoneRig, transforms_window: np.ndarray) -> np.ndarray:
    """(3, K, 4, 4) skinning transforms → (3, B, 3) posed bone positions."""
    return np.stack([skin_bones(rig, t) for t in transforms_window])


class PoseDeformer:
    def __init__(
        self,
        store: ParamStore,
        bone_count: int,
        bone_hidden,
        feature_dim: int,
        pose_embed_dim: int,
        max_joints: int,
        conv_layers: int,
        conv_channels: int,
        use_conv_mlp: bool = True,
    ):
        self.bone_net = BoneNet(store, bone_count, bone_hidden)
        self.pose_embed = PoseEmbedding(store, max_joints, pose_embed_dim)
        self.conv_mlp = ConvMLP(store, 3 + feature_dim + pose_embed_dim, conv_channels, conv_layers)
        self.use_conv_mlp = use_conv_mlp

    def stage1(
        self,
        rig: BoneRig,
        weights: Tensor,
        film: FilmParams,
        transforms_window: np.ndarray,
        bones: Optional[np.ndarray] = None,
    ) -> Tuple[Tensor, Tensor, np.ndarray]:
        """Returns (positions, corrections, posed bones of the newest frame)."""
        if transforms_window.ndim != 4 or transforms_window.shape[0] != 3:
            raise ShapeMismatchError("pose_deformer", [transforms_window.shape], "(3, K, 4, 4)")
        if bones is None:
            bones = bone_window(rig, transforms_window)
        corrections = bone_net_forward(self.bone_net, bones, film)
        positions = skin_garment_tensor(
            weights,
            bone_base_6d(rig, transforms_window[-1]),
            bones[-1],
            corrections,
            rig.positions,
            rig.canonical,
        )
        return positions, corrections, bones[-1]

    def uv_input(
        self,
        stage1: Tensor,
        posed_bones: np.ndarray,
        uv_features: Tensor,
        pose_window: np.ndarray,
        texmap: TexelMap,
    ) -> Tensor:
        """X_UV = [P_UV | F_UV | φ] as (H, W, 3 + d_f + d_φ)."""
        texels = texmap.height * texmap.width
        centroid = Tensor(posed_bones.mean(axis=0, keepdims=True))
        p_uv = ops.spmm(texmap.raster, ops.sub(stage1, centroid))
        phi = broadcast_rows(self.pose_embed(pose_window), texels)
        stacked = ops.concat([p_uv, uv_features, phi], axis=-1)
        return ops.reshape(stacked, (texmap.height, texmap.width, stacked.shape[-1]))

    def stage2(
        self,
        stage1: Tensor,
        posed_bones: np.ndarray,
        uv_features: Tensor,
        pose_window: np.ndarray,
        texmap: TexelMap,
    ) -> Tensor:
        if not self.use_conv_mlp:
            return stage1
        x = self.uv_input(stage1, posed_bones, uv_features, pose_window, texmap)
        return ops.add(stage1, conv_mlp_forward(self.conv_mlp, x, texmap))

    def __call__(
        self,
        rig: BoneRig,
        weights: Tensor,
        film: FilmParams,
        uv_features: Tensor,
        texmap: TexelMap,
        transforms_window: np.ndarray,
        pose_window: np.ndarray,
    ) -> DeformerOutput:
        stage1, corrections, posed = self.stage1(rig, weights, film, transforms_window)
        positions = self.stage2(stage1, posed, uv_features, pose_window, texmap)
        return DeformerOutput(stage1=stage1, positions=positions, corrections=corrections)
