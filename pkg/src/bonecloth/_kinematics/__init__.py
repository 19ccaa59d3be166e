# Area: Kinematics
# PRD: docs/prd-bonecloth.md
"""Skeletons, 6D rotations, bodies, pose files and the virtual-bone rig."""

from .rotation6d import (
    encode_6d,
    rotation_6d_to_matrix,
    rotation_6d_to_matrix_tensor,
    flat_to_matrix,
    matrix_to_flat,
    apply_flat,
)
from .skeleton import Skeleton, pose_skeleton, skinning_transforms, rest_world, joint_positions, IDENTITY_6D
from .body import (
    SkinnedBody,
    posed_body_vertices,
    posed_sdf,
    rest_sdf,
    pose_vertices,
    read_body,
    write_body,
)
from .poses import PoseSequence, PoseWindow, read_poses, write_poses
from .rig import (
    BoneRig,
    build_bone_rig,
    skin_bones,
    bone_base_6d,
    init_garment_weights,
    weights_from_distances,
    correct_weights,
    correct_weights_tensor,
    skin_garment,
    skin_garment_tensor,
)

__all__ = [
    "encode_6d",
    "rotation_6d_to_matrix",
    "rotation_6d_to_matrix_tensor",
    "flat_to_matrix",
    "matrix_to_flat",
    "apply_flat",
    "Skeleton",
    "pose_skeleton",
    "skinning_transforms",
    "rest_world",
    "joint_positions",
    "IDENTITY_6D",
    "SkinnedBody",
    "posed_body_vertices",
    "posed_sdf",
    "rest_sdf",
    "pose_vertices",
    "read_body",
    "write_body",
    "PoseSequence",
    "PoseWindow",
    "read_poses",
    "write_poses",
    "BoneRig",
    "build_bone_rig",
    "skin_bones",
    "bone_base_6d",
    "init_garment_weights",
    "weights_from_distances",
    "correct_weights",
    "correct_weights_tensor",
    "skin_garment",
    "skin_garment_tensor",
]
