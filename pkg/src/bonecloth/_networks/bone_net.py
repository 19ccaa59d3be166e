# Area: Networks
# PRD: docs/prd-bonecloth.md
"""
bonecloth._networks.bone_net — Bone-Net with FiLM shape modulation
==================================================================

The shape modulator maps z to one (γ, β) pair per Bone-Net hidden layer;
Bone-Net applies ``h ← γ ⊙ h + β`` after each hidden linear layer and
before its ReLU. The γ head starts with zero weights and unit bias and the
β head at zero, so the untrained modulator is the identity.

Bone-Net input is the global flatten of (position, velocity) for every
bone over the last three frames; the output head (zero init) emits a
(B, 9) correction [Δr (6) | Δt (3)].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from ..errors import ShapeMismatchError
from .._diffcore import ops
from .._diffcore.params import ParamStore
from .._diffcore.tape import Tensor
from .layers import Linear

WINDOW = 3
PER_BONE_FRAME = 6


@dataclass(frozen=True, eq=False)
class FilmParams:
    """Per-layer (1, width) scale and shift tensors."""

    gammas: List[Tensor]
    betas: List[Tensor]

    @property
    def widths(self) -> List[int]:
        return [g.shape[-1] for g in self.gammas]


def identity_film(widths: Sequence[int]) -> FilmParams:
    """γ = 1, β = 0 for every layer."""
    return FilmParams(
        gammas=[Tensor(np.ones((1, w))) for w in widths],
        betas=[Tensor(np.zeros((1, w))) for w in widths],
    )


class ShapeModulator:
    def __init__(self, store: ParamStore, shape_dim: int, hidden: int, widths: Sequence[int]):
        self.widths = list(widths)
        total = sum(self.widths)
        self.hidden = Linear(store, "modulator.hidden", shape_dim, hidden)
        self.gamma = Linear(store, "modulator.gamma", hidden, total, init="zero")
        self.beta = Linear(store, "modulator.beta", hidden, total, init="zero")
        self.gamma.bias.data[...] = 1.0

    def __call__(self, z: Tensor) -> FilmParams:
        if z.ndim != 2 or z.shape != (1, self.hidden.in_dim):
            raise ShapeMismatchError("shape_modulator", [z.shape], f"(1, {self.hidden.in_dim})")
        h = ops.relu(self.hidden(z))
        gamma_all = self.gamma(h)
        beta_all = self.beta(h)
        gammas, betas, start = [], [], 0
        for w in self.widths:
            gammas.append(ops.slice_last(gamma_all, start, start + w))
            betas.append(ops.slice_last(beta_all, start, start + w))
            start += w
        return FilmParams(gammas=gammas, betas=betas)


def bone_inputs(bone_window: np.ndarray) -> np.ndarray:
    """
    (3, B, 3) posed bone positions, oldest first → (1, B·18) features.

    Velocities are frame differences; the oldest frame's velocity is zero.
    """
    window = np.asarray(bone_window, dtype=np.float64)
    if window.ndim != 3 or window.shape[0] != WINDOW or window.shape[2] != 3:
        raise ShapeMismatchError("bone_net_forward", [window.shape], "(3, B, 3)")
    velocity = np.zeros_like(window)
    velocity[1:] = window[1:] - window[:-1]
    per_bone = np.concatenate([window, velocity], axis=2).transpose(1, 0, 2)
    return per_bone.reshape(1, -1)


class BoneNet:
    def __init__(self, store: ParamStore, bone_count: int, hidden: Sequence[int]):
        self.bone_count = bone_count
        dims = [bone_count * WINDOW * PER_BONE_FRAME, *hidden]
        self.layers = [Linear(store, f"bone_net.{i}", dims[i], dims[i + 1]) for i in range(len(hidden))]
        self.head = Linear(store, "bone_net.head", dims[-1], bone_count * 9, init="zero")

    @property
    def widths(self) -> List[int]:
        return [layer.out_dim for layer in self.layers]

    def __call__(self, features: Tensor, film: FilmParams) -> Tensor:
        if features.shape != (1, self.layers[0].in_dim):
            raise ShapeMismatchError("bone_net_forward", [features.shape], f"(1, {self.layers[0].in_dim})")
        if film.widths != self.widths:
            raise ShapeMismatchError("bone_net_forward", [tuple(film.widths), tuple(self.widths)], "FiLM widths")
        h = features
        for layer, gamma, beta in zip(self.layers, film.gammas, film.betas):
            h = ops.relu(ops.add(ops.mul(gamma, layer(h)), beta))
        return ops.reshape(self.head(h), (self.bone_count, 9))


def bone_net_forward(net: BoneNet, bone_window: np.ndarray, film: FilmParams) -> Tensor:
    """(B, 9) corrections for a (3, B, 3) window of posed bone positions."""
    return net(Tensor(bone_inputs(bone_window)), film)
