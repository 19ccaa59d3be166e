# Area: Runtime
# PRD: docs/prd-bonecloth.md
"""
bonecloth._runtime.cache — Identity cache and BIDC files
========================================================

The identity encoder runs once per identity; its outputs plus the corrected weights
Ŵ = softmax(W⁰ + Δw) are everything the per-frame path needs besides the
rig and the texel map, which are rebuilt from the assets on load.

BIDC layout (little-endian)::

    b"BIDC"  u32 version
    z             rank, dims, float32 (1, d_z)
    delta_weights rank, dims, float32 (V, B)
    uv_features   rank, dims, float32 (H, W, d_f)
    weights       rank, dims, float32 (V, B)   Ŵ
    bone_vertices rank, dims, float32 (B,)     garment vertex index per bone
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..config import RunConfig
from ..errors import AssetValidationError, FileFormatError
from .._assets.bundle import AssetBundle
from .._diffcore.tape import Tensor
from .._geometry.uv import TexelMap
from .._kinematics.rig import BoneRig, correct_weights
from .._kinematics.skeleton import Skeleton
from .._networks.identity import encode_identity
from .._networks.model import GarmentModel
from .._shared.binio import PathLike, Reader, atomic_write_bytes, pack_array, pack_u32
from .._training.identity import identity_graph, identity_rig

logger = logging.getLogger("bonecloth.runtime")

MAGIC = b"BIDC"
VERSION = 1


@dataclass(frozen=True, eq=False)
class IdentityCache:
    z: np.ndarray
    delta_weights: np.ndarray
    uv_features: np.ndarray
    weights: np.ndarray
    rig: BoneRig
    texmap: TexelMap
    skeleton: Skeleton

    def __post_init__(self):
        for name in ("z", "delta_weights", "uv_features", "weights"):
            array = np.ascontiguousarray(getattr(self, name), dtype=np.float32)
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    @property
    def bone_count(self) -> int:
        return self.rig.bone_count

    @property
    def vertex_count(self) -> int:
        return self.rig.vertex_count

    def film(self, model: GarmentModel):
        return model.film(Tensor(self.z))


def _check_model(model: GarmentModel, rig: BoneRig) -> None:
    if model.bone_count != rig.bone_count:
        raise AssetValidationError(
            f"Model has {model.bone_count} bones, the identity rig has {rig.bone_count}",
            operation="build_identity_cache",
        )


def build_identity_cache(model: GarmentModel, bundle: AssetBundle, config: RunConfig) -> IdentityCache:
    """
    Run the identity encoder once and fold Δw into Ŵ.

    Raises:
        AssetValidationError: the model was trained with a different bone count
    """
    rig, texmap = identity_rig(bundle, config)
    _check_model(model, rig)
    graph, _, _ = identity_graph(bundle, config)
    out = encode_identity(model.identity, graph, texmap)
    delta = out.delta_weights.data.astype(np.float32)
    grid = out.uv_features.data.reshape(texmap.height, texmap.width, -1).astype(np.float32)
    cache = IdentityCache(
        z=out.z.data,
        delta_weights=delta,
        uv_features=grid,
        weights=correct_weights(rig.init_weights, delta),
        rig=rig,
        texmap=texmap,
        skeleton=bundle.body.skeleton,
    )
    logger.info(f"Built identity cache: {rig.vertex_count} vertices, {rig.bone_count} bones")
    return cache


def write_identity_cache(path: PathLike, cache: IdentityCache) -> None:
    payload = b"".join([
        MAGIC,
        pack_u32(VERSION),
        pack_array(cache.z),
        pack_array(cache.delta_weights),
        pack_array(cache.uv_features),
        pack_array(cache.weights),
        pack_array(cache.rig.bone_vertices),
    ])
    atomic_write_bytes(path, payload)
    logger.debug(f"Wrote identity cache {path}")


def read_identity_cache(path: PathLike, bundle: AssetBundle, config: RunConfig) -> IdentityCache:
    """
    Load a cache and re-attach the rig and texel map rebuilt from *bundle*.

    Raises:
        FileFormatError: bad magic, version or truncated payload
        AssetValidationError: the cache was built for other assets or settings
    """
    reader = Reader.open(path)
    reader.expect_magic(MAGIC)
    reader.check_version(VERSION)
    z, delta, grid, weights, bones = (reader.array() for _ in range(5))
    if not reader.exhausted:
        raise FileFormatError(str(path), "trailing bytes after identity cache")
    if z.ndim != 2 or z.shape[0] != 1 or grid.ndim != 3 or delta.shape != weights.shape:
        raise FileFormatError(str(path), "inconsistent record shapes")
    rig, texmap = identity_rig(bundle, config)
    if not np.array_equal(bones.astype(np.int64), rig.bone_vertices):
        raise AssetValidationError(f"{path}: bone sampling differs from the current assets", operation="read_identity_cache")
    if delta.shape != (rig.vertex_count, rig.bone_count) or grid.shape[:2] != (texmap.height, texmap.width):
        raise AssetValidationError(
            f"{path}: cache shapes {delta.shape} / {grid.shape} do not match the assets",
            operation="read_identity_cache",
        )
    return IdentityCache(
        z=z,
        delta_weights=delta,
        uv_features=grid,
        weights=weights,
        rig=rig,
        texmap=texmap,
        skeleton=bundle.body.skeleton,
    )
