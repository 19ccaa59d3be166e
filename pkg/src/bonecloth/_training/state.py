# Area: Training
# PRD: docs/prd-bonecloth.md
"""
bonecloth._training.state — Resumable training state
====================================================

A training-state file is a BNCK checkpoint with these record groups:

    <param name>        network parameters
    opt.m.<name>        Adam first moments
    opt.v.<name>        Adam second moments
    state.*             epoch, Adam step, skipped updates, lr halvings, guard flag
    loss.<column>       one value per finished epoch

Every value is float32 on disk; counters stay exact below 2^24.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from ..errors import FileFormatError
from .._diffcore.checkpoint import load_checkpoint, save_checkpoint
from .._diffcore.optim import AdamState
from .._networks.model import GarmentModel
from .._shared.binio import PathLike

LOSS_COLUMNS = (
    "physics_loss", "stretch", "bend", "collision", "inertia", "friction",
    "consistency_loss", "mse", "laplacian", "interp", "collision_pct", "learning_rate", "rejected",
)

_COUNTERS = ("epoch", "adam_t", "adam_skipped", "lr_halvings", "guard_active")


@dataclass
class TrainState:
    epoch: int = 0
    adam: AdamState = field(default_factory=AdamState)
    lr_halvings: int = 0
    guard_active: bool = False
    history: List[Dict[str, float]] = field(default_factory=list)

    def learning_rate(self, base: float) -> float:
        return base * 0.5 ** self.lr_halvings


def state_arrays(model: GarmentModel, state: TrainState) -> Dict[str, np.ndarray]:
    arrays: Dict[str, np.ndarray] = dict(model.state_dict())
    for name in model.params:
        if name in state.adam.m:
            arrays[f"opt.m.{name}"] = state.adam.m[name]
            arrays[f"opt.v.{name}"] = state.adam.v[name]
    counters = {
        "epoch": state.epoch,
        "adam_t": state.adam.step,
        "adam_skipped": state.adam.skipped,
        "lr_halvings": state.lr_halvings,
        "guard_active": int(state.guard_active),
    }
    for key, value in counters.items():
        arrays[f"state.{key}"] = np.array([value], dtype=np.float32)
    for column in LOSS_COLUMNS:
        arrays[f"loss.{column}"] = np.array([row[column] for row in state.history], dtype=np.float32)
    return arrays


def save_train_state(path: PathLike, model: GarmentModel, state: TrainState) -> None:
    save_checkpoint(path, state_arrays(model, state))


def load_train_state(path: PathLike, model: GarmentModel) -> TrainState:
    """
    Restore parameters into *model* and return the optimizer/schedule state.

    Raises:
        FileFormatError: missing records or shapes that do not match the model
    """
    expected = {name: t.shape for name, t in model.params.items()}
    arrays = load_checkpoint(path, expected=expected)
    for key in _COUNTERS:
        if f"state.{key}" not in arrays:
            raise FileFormatError(str(path), f"missing 'state.{key}' (not a training-state file)")
    model.params.load_state_dict({n: arrays[n] for n in expected})
    counters = {key: int(arrays[f"state.{key}"][0]) for key in _COUNTERS}
    adam = AdamState(step=counters["adam_t"], skipped=counters["adam_skipped"])
    for name in expected:
        if f"opt.m.{name}" in arrays:
            adam.m[name] = arrays[f"opt.m.{name}"]
            adam.v[name] = arrays[f"opt.v.{name}"]
    columns = {c: arrays.get(f"loss.{c}", np.zeros(0, dtype=np.float32)) for c in LOSS_COLUMNS}
    rows = len(columns[LOSS_COLUMNS[0]])
    history = [{c: float(columns[c][i]) for c in LOSS_COLUMNS} for i in range(rows)]
    return TrainState(
        epoch=counters["epoch"],
        adam=adam,
        lr_halvings=counters["lr_halvings"],
        guard_active=bool(counters["guard_active"]),
        history=history,
    )
