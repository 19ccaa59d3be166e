# Area: Networks
# PRD: docs/prd-bonecloth.md
"""Learned components: graph encoder, dynamics teacher, identity encoder, pose deformer and their layers."""

from .layers import Linear, MLP, Conv2d
from .graph import (
    GraphScales,
    GraphTopology,
    GraphInputs,
    build_topology,
    canonical_graph,
    dynamic_graph,
    knn_body_links,
    proximity_links,
    node_features,
    edge_features,
    KIND_CLOTH,
    KIND_PINNED,
    KIND_BODY,
)
from .encoder import GraphEncoder, EncodedGraph
from .dynamics import DynamicsPredictor, dynamics_step
from .identity import IdentityEncoder, IdentityOutput, encode_identity
from .bone_net import BoneNet, FilmParams, ShapeModulator, bone_inputs, bone_net_forward, identity_film
from .conv_mlp import ConvMLP, PoseEmbedding, conv_mlp_forward, pad_pose_window
from .deformer import PoseDeformer, DeformerOutput, bone_window
from .model import (
    GarmentModel,
    TEACHER_PREFIXES,
    STUDENT_PREFIXES,
    IDENTITY_PREFIXES,
    ENCODER_PREFIXES,
    DYNAMICS_PREFIXES,
)

__all__ = [
    "Linear",
    "MLP",
    "Conv2d",
    "GraphScales",
    "GraphTopology",
    "GraphInputs",
    "build_topology",
    "canonical_graph",
    "dynamic_graph",
    "knn_body_links",
    "proximity_links",
    "node_features",
    "edge_features",
    "KIND_CLOTH",
    "KIND_PINNED",
    "KIND_BODY",
    "GraphEncoder",
    "EncodedGraph",
    "DynamicsPredictor",
    "dynamics_step",
    "IdentityEncoder",
    "IdentityOutput",
    "encode_identity",
    "BoneNet",
    "FilmParams",
    "ShapeModulator",
    "bone_inputs",
    "bone_net_forward",
    "identity_film",
    "ConvMLP",
    "PoseEmbedding",
    "conv_mlp_forward",
    "pad_pose_window",
    "PoseDeformer",
    "DeformerOutput",
    "bone_window",
    "GarmentModel",
    "TEACHER_PREFIXES",
    "STUDENT_PREFIXES",
    "IDENTITY_PREFIXES",
    "ENCODER_PREFIXES",
    "DYNAMICS_PREFIXES",
]
