# Area: Networks
# PRD: docs/prd-bonecloth.md
"""UV-space refinement: pose embedding φ and the Conv-MLP."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatchError
from .._diffcore import ops
from .._diffcore.params import ParamStore
from .._diffcore.tape import Tensor
from .._geometry.uv import TexelMap
from .layers import Conv2d, Linear


def pad_pose_window(window: np.ndarray, max_joints: int) -> np.ndarray:
    """(3, K, 6) joint rotations, zero-padded to max_joints and flattened to (1, max_joints·18)."""
    window = np.asarray(window, dtype=np.float64)
    if window.ndim != 3 or window.shape[0] != 3 or window.shape[2] != 6:
        raise ShapeMismatchError("pose_embedding", [window.shape], "(3, K, 6)")
    if window.shape[1] > max_joints:
        raise ShapeMismatchError("pose_embedding", [window.shape], f"at most {max_joints} joints")
    padded = np.zeros((3, max_joints, 6))
    padded[:, : window.shape[1]] = window
    return padded.reshape(1, -1)


class PoseEmbedding:
    """φ^t: a linear projection of the padded 3-frame rotation window."""

    def __init__(self, store: ParamStore, max_joints: int, embed_dim: int):
        self.max_joints = max_joints
        self.proj = Linear(store, "pose_embed.proj", max_joints * 18, embed_dim)

    def __call__(self, window: np.ndarray) -> Tensor:
        return self.proj(Tensor(pad_pose_window(window, self.max_joints)))


class ConvMLP:
    """
    3×3 convolutions with ReLU, then a zero-initialized 1×1 head to
    (H, W, 3); output is masked by texel occupancy.
    """

    def __init__(self, store: ParamStore, in_channels: int, channels: int, layers: int):
        self.in_channels = in_channels
        convs = []
        c_in = in_channels
        for i in range(layers):
            convs.append(Conv2d(store, f"conv_mlp.{i}", 3, c_in, channels))
            c_in = channels
        self.convs = convs
        self.head = Conv2d(store, "conv_mlp.head", 1, c_in, 3, init="zero")

    def __call__(self, x: Tensor, texmap: TexelMap) -> Tensor:
        if x.shape != (texmap.height, texmap.width, self.in_channels):
            raise ShapeMismatchError("conv_mlp_forward", [x.shape], f"({texmap.height}, {texmap.width}, {self.in_channels})")
        h = x
        for conv in self.convs:
            h = ops.relu(conv(h))
        mask = Tensor(texmap.occupancy[:, :, None].astype(np.float64))
        return ops.mul(self.head(h), mask)


def conv_mlp_forward(net: ConvMLP, x: Tensor, texmap: TexelMap) -> Tensor:
    """Per-vertex δp (V, 3) read back from the masked displacement grid."""
    grid = net(x, texmap)
    return ops.spmm(texmap.sample, ops.reshape(grid, (texmap.height * texmap.width, 3)))
