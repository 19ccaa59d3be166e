# Area: Networks
# PRD: docs/prd-bonecloth.md
"""Dynamics teacher: per-vertex cloth acceleration from a short graph history."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import ShapeMismatchError
from .._diffcore import ops
from .._diffcore.params import ParamStore
from .._diffcore.tape import Tensor
from .encoder import GraphEncoder
from .graph import GraphInputs, GraphScales
from .layers import MLP

HISTORY = 3


class DynamicsPredictor:
    """
    Shared encoder followed by a zero-initialized acceleration decoder.

    The history supplies positions at t-2, t-1 and t; velocities in the
    newest graph already carry the finite differences, so only that graph
    goes through the encoder. Body nodes are boundary conditions and get
    no prediction.
    """

    def __init__(self, store: ParamStore, encoder: GraphEncoder, hidden: int):
        self.encoder = encoder
        self.decoder = MLP(store, "dynamics.decoder", (encoder.latent, hidden, 3), last_init="zero")

    def __call__(self, history: Sequence[GraphInputs], scales: GraphScales) -> Tensor:
        if len(history) != HISTORY:
            raise ShapeMismatchError("dynamics_step", [(len(history),)], f"history of {HISTORY} graphs")
        current = history[-1]
        cloth = current.topology.cloth_count
        encoded = self.encoder(current)
        cloth_latent = ops.gather_rows(encoded.nodes, np.arange(cloth))
        # decoder emits a per-frame displacement change in units of the rest edge length
        per_frame = self.decoder(cloth_latent)
        return ops.scale(per_frame, scales.length / (scales.dt * scales.dt))


def dynamics_step(model: DynamicsPredictor, history: Sequence[GraphInputs], scales: GraphScales) -> Tensor:
    """(V_c, 3) accelerations in m/s²."""
    return model(history, scales)
