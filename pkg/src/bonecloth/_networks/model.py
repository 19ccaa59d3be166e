# Area: Networks
# PRD: docs/prd-bonecloth.md
"""
bonecloth._networks.model — All learned components over one store
=================================================================

Parameters are registered in a fixed order (encoder, dynamics, identity,
modulator, bone_net, pose_embed, conv_mlp) from the ``init`` random
stream, so the same seed always builds the same model.

Parameter groups:
    teacher  = encoder.* + dynamics.*      (dynamics teacher)
    identity = identity.*                  (identity heads; they also read encoder.*)
    student  = modulator.* + bone_net.* + pose_embed.* + conv_mlp.*   (pose deformer)
"""

from __future__ import annotations

import logging
from typing import Dict, Optional

import numpy as np

from ..config import NetworksConfig
from ..errors import FileFormatError
from .._diffcore.checkpoint import load_checkpoint, save_checkpoint
from .._diffcore.params import ParamStore
from .._diffcore.tape import Tensor
from .._shared.binio import PathLike
from .._shared.rng import stream
from .bone_net import FilmParams, ShapeModulator
from .deformer import PoseDeformer
from .dynamics import DynamicsPredictor
from .encoder import GraphEncoder
from .identity import IdentityEncoder

logger = logging.getLogger("bonecloth.networks")

ENCODER_PREFIXES = ("encoder.",)
DYNAMICS_PREFIXES = ("dynamics.",)
TEACHER_PREFIXES = ENCODER_PREFIXES + DYNAMICS_PREFIXES
IDENTITY_PREFIXES = ("identity.",)
STUDENT_PREFIXES = ("modulator.", "bone_net.", "pose_embed.", "conv_mlp.")


class GarmentModel:
    def __init__(self, config: NetworksConfig, bone_count: int, seed: int = 0):
        self.config = config
        self.bone_count = bone_count
        self.params = ParamStore(stream(seed, "init"))
        self.encoder = GraphEncoder(self.params, config.latent_dim, config.message_rounds)
        self.dynamics = DynamicsPredictor(self.params, self.encoder, config.latent_dim)
        self.identity = IdentityEncoder(
            self.params, self.encoder, config.shape_dim, bone_count, config.feature_dim
        )
        self.modulator = ShapeModulator(
            self.params, config.shape_dim, config.modulator_hidden, config.bone_net_hidden
        )
        self.deformer = PoseDeformer(
            self.params,
            bone_count,
            config.bone_net_hidden,
            config.feature_dim,
            config.pose_embed_dim,
            config.max_joints,
            config.conv_layers,
            config.conv_channels,
            use_conv_mlp=config.use_conv_mlp,
        )
        logger.debug(f"Built model: {len(self.params)} tensors, {self.params.count()} values")

    def film(self, z: Tensor) -> FilmParams:
        return self.modulator(z)

    def group(self, prefixes) -> Dict[str, Tensor]:
        return self.params.subset(tuple(prefixes))

    def state_dict(self) -> Dict[str, np.ndarray]:
        return self.params.state_dict()

    def save(self, path: PathLike) -> None:
        save_checkpoint(path, self.state_dict())

    @classmethod
    def load(cls, path: PathLike, config: NetworksConfig, seed: int = 0, bone_count: Optional[int] = None) -> "GarmentModel":
        """Rebuild from a checkpoint; the bone count is read from the weight head when not given."""
        arrays = load_checkpoint(path)
        if bone_count is None:
            key = "identity.weights.bias"
            if key not in arrays:
                raise FileFormatError(str(path), f"missing '{key}'")
            bone_count = int(arrays[key].shape[0])
        model = cls(config, bone_count, seed)
        model.params.load_state_dict({k: v for k, v in arrays.items() if k in model.params})
        return model
