# Area: Networks
# PRD: docs/prd-bonecloth.md
"""Dense and convolutional layers over the parameter store."""

from __future__ import annotations

from typing import Literal, Optional, Sequence

import numpy as np

from .._diffcore import ops
from .._diffcore.params import ParamStore
from .._diffcore.tape import Tensor

Init = Literal["kaiming", "zero"]


class Linear:
    """y = x W + b with W (in, out); parameters ``<name>.weight`` / ``<name>.bias``."""

    def __init__(self, store: ParamStore, name: str, in_dim: int, out_dim: int, init: Init = "kaiming"):
        self.name = name
        self.in_dim = in_dim
        self.out_dim = out_dim
        if init == "zero":
            self.weight = store.zeros(f"{name}.weight", (in_dim, out_dim))
        else:
            self.weight = store.kaiming(f"{name}.weight", (in_dim, out_dim), fan_in=in_dim)
        self.bias = store.zeros(f"{name}.bias", (out_dim,))

    def __call__(self, x: Tensor) -> Tensor:
        return ops.add(ops.matmul(x, self.weight), self.bias)


class MLP:
    """
    Linear layers with ReLU between them; the last layer is linear.
    ``layer_norm`` normalizes the output (MeshGraphNet blocks).
    """

    def __init__(
        self,
        store: ParamStore,
        name: str,
        dims: Sequence[int],
        layer_norm: bool = False,
        last_init: Init = "kaiming",
    ):
        self.layers = [
            Linear(store, f"{name}.{i}", dims[i], dims[i + 1], init=last_init if i == len(dims) - 2 else "kaiming")
            for i in range(len(dims) - 1)
        ]
        self.layer_norm = layer_norm

    def __call__(self, x: Tensor) -> Tensor:
        for i, layer in enumerate(self.layers):
            x = layer(x)
            if i < len(self.layers) - 1:
                x = ops.relu(x)
        return ops.layer_norm(x) if self.layer_norm else x


class Conv2d:
    """Stride-1 same-padded convolution; weight (k, k, C_in, C_out)."""

    def __init__(self, store: ParamStore, name: str, kernel: int, in_channels: int, out_channels: int, init: Init = "kaiming"):
        shape = (kernel, kernel, in_channels, out_channels)
        if init == "zero":
            self.weight = store.zeros(f"{name}.weight", shape)
        else:
            self.weight = store.kaiming(f"{name}.weight", shape, fan_in=kernel * kernel * in_channels)
        self.bias = store.zeros(f"{name}.bias", (out_channels,))

    def __call__(self, x: Tensor) -> Tensor:
        return ops.conv2d(x, self.weight, self.bias)


def ones_column(rows: int) -> Tensor:
    return Tensor(np.ones((rows, 1)))


def broadcast_rows(row: Tensor, rows: int, cache: Optional[Tensor] = None) -> Tensor:
    """Repeat a (1, C) tensor over *rows* rows with an explicit product."""
    return ops.matmul(cache if cache is not None else ones_column(rows), row)
