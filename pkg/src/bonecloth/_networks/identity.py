# Area: Networks
# PRD: docs/prd-bonecloth.md
"""
bonecloth._networks.identity — Identity encoder
===============================================

One pass of the shared encoder over the canonical body-garment graph,
then three heads over the garment node features F_c:

- shape code z: mean over garment nodes, then a linear map
- weight correction Δw: per-vertex linear map to B logits (zero init)
- UV features f: per-vertex linear map to d_f channels (zero init),
  rasterized into F_UV
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._diffcore import ops
from .._diffcore.params import ParamStore
from .._diffcore.tape import Tensor
from .._geometry.uv import TexelMap
from .encoder import GraphEncoder
from .graph import GraphInputs
from .layers import Linear


@dataclass(frozen=True, eq=False)
class IdentityOutput:
    """z (1, d_z); delta_weights (V_c, B); features (V_c, d_f); uv_features (H·W, d_f)."""

    z: Tensor
    delta_weights: Tensor
    features: Tensor
    uv_features: Tensor


class IdentityEncoder:
    def __init__(self, store: ParamStore, encoder: GraphEncoder, shape_dim: int, bone_count: int, feature_dim: int):
        self.encoder = encoder
        self.shape_head = Linear(store, "identity.shape", encoder.latent, shape_dim)
        self.weight_head = Linear(store, "identity.weights", encoder.latent, bone_count, init="zero")
        self.feature_head = Linear(store, "identity.features", encoder.latent, feature_dim, init="zero")

    def __call__(self, graph: GraphInputs, texmap: TexelMap) -> IdentityOutput:
        encoded = self.encoder(graph)
        garment = ops.gather_rows(encoded.nodes, np.arange(graph.topology.cloth_count))
        z = self.shape_head(ops.mean(garment, axis=0, keepdims=True))
        delta = self.weight_head(garment)
        features = self.feature_head(garment)
        return IdentityOutput(
            z=z,
            delta_weights=delta,
            features=features,
            uv_features=ops.spmm(texmap.raster, features),
        )


def encode_identity(model: IdentityEncoder, graph: GraphInputs, texmap: TexelMap) -> IdentityOutput:
    return model(graph, texmap)
