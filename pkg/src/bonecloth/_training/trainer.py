# Area: Training
# PRD: docs/prd-bonecloth.md
"""
bonecloth._training.trainer — The two-phase training loop
=========================================================

Epochs [0, warmup_epochs) run warmup_step, the rest run joint_step.
Each epoch trains on one identity (round-robin) and draws its windows
from the ``windows`` random stream keyed by the epoch number, so a run
resumed from any training-state file replays the uninterrupted run.

Output directory::

    loss_log.csv                  one row per epoch
    train_state.bnck              latest resumable state
    checkpoints/epoch_NNNNN.bnck  resumable state every checkpoint_every epochs
    model.bnck                    final parameters
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..config import RunConfig
from ..errors import AssetValidationError, ConfigValidationError
from .._assets.bundle import read_bundle
from .._networks.model import GarmentModel
from .._shared.binio import PathLike, atomic_write_text
from .._shared.rng import stream
from .identity import Identity, prepare_identity
from .state import LOSS_COLUMNS, TrainState, load_train_state, save_train_state
from .steps import StepResult, TrainWindow, joint_step, warmup_step

logger = logging.getLogger("bonecloth.training")

LOSS_LOG = "loss_log.csv"
STATE_FILE = "train_state.bnck"
MODEL_FILE = "model.bnck"


@dataclass
class TrainResult:
    model: GarmentModel
    state: TrainState
    model_path: Path
    loss_log: Path


def phase_of(epoch: int, config: RunConfig) -> str:
    return "warmup" if epoch < config.training.warmup_epochs else "joint"


def load_identities(asset_dirs: Sequence[PathLike], config: RunConfig) -> List[Identity]:
    """
    Raises:
        AssetValidationError: no identity given, sequences shorter than a
            training window, or identities that disagree on the bone count
    """
    if not asset_dirs:
        raise AssetValidationError("No identity asset directories given", operation="train")
    identities = [prepare_identity(Path(d).name, read_bundle(d), config) for d in asset_dirs]
    needed = config.training.window_length + 3
    for ident in identities:
        if not ident.train:
            raise AssetValidationError(f"{ident.name}: no training sequences", operation="train")
        short = [s.frame_count for s in ident.train if s.frame_count < needed]
        if short:
            raise AssetValidationError(
                f"{ident.name}: training sequences need at least {needed} frames, got {min(short)}",
                operation="train",
            )
    counts = {ident.rig.bone_count for ident in identities}
    if len(counts) != 1:
        raise ConfigValidationError(
            f"Identities disagree on the bone count: {sorted(counts)}", operation="train"
        )
    return identities


def epoch_windows(identities: Sequence[Identity], epoch: int, config: RunConfig, length: int) -> List[TrainWindow]:
    """Deterministic windows of one epoch: one identity, windows_per_epoch draws."""
    index = epoch % len(identities)
    ident = identities[index]
    rng = stream(config.seed, "windows", epoch)
    windows = []
    for _ in range(config.training.windows_per_epoch):
        sequence = int(rng.integers(len(ident.train)))
        frames = ident.train[sequence].frame_count
        start = int(rng.integers(2, frames - length))
        windows.append(TrainWindow(identity=index, sequence=sequence, start=start, length=length))
    return windows


def epoch_row(results: Sequence[StepResult], lr: float) -> Dict[str, float]:
    row = {column: 0.0 for column in LOSS_COLUMNS}
    accepted = [r for r in results if not r.rejected]
    for column in LOSS_COLUMNS:
        values = [r.values[column] for r in accepted if column in r.values]
        if values:
            row[column] = float(np.mean(values))
    if accepted:
        row["collision_pct"] = float(np.mean([r.collision_pct for r in accepted]))
    else:
        row["physics_loss"] = float("nan")
    row["learning_rate"] = lr
    row["rejected"] = float(len(results) - len(accepted))
    return row


def render_loss_log(history: Sequence[Dict[str, float]], config: RunConfig) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(("epoch", "phase") + LOSS_COLUMNS)
    for epoch, row in enumerate(history):
        # float32 first so a resumed history prints exactly like a live one
        cells = [f"{float(np.float32(row[c])):.9g}" for c in LOSS_COLUMNS]
        writer.writerow([epoch + 1, phase_of(epoch, config)] + cells)
    return buffer.getvalue()


def _update_guard(state: TrainState, row: Dict[str, float], phase: str, config: RunConfig) -> None:
    threshold = config.training.instability_threshold
    if phase != "warmup":
        state.guard_active = False
        return
    collision = row["collision_pct"]
    if not state.guard_active and collision > threshold:
        state.guard_active = True
        logger.warning(
            f"Epoch {state.epoch}: teacher penetration {collision:.1f}% > {threshold:g}%; "
            "rollout length reduced to 1"
        )
    elif state.guard_active and collision <= threshold:
        state.guard_active = False
        logger.info(f"Epoch {state.epoch}: teacher recovered; rollout length restored")


def run_epoch(
    model: GarmentModel,
    identities: Sequence[Identity],
    state: TrainState,
    config: RunConfig,
) -> Dict[str, float]:
    epoch = state.epoch
    phase = phase_of(epoch, config)
    length = 1 if state.guard_active else config.training.window_length
    step = warmup_step if phase == "warmup" else joint_step
    results = []
    for window in epoch_windows(identities, epoch, config, length):
        ident = identities[window.identity]
        results.append(step(model, ident, ident.train[window.sequence], window, state, config))
    row = epoch_row(results, state.learning_rate(config.training.learning_rate))
    state.epoch = epoch + 1
    state.history.append(row)
    _update_guard(state, row, phase, config)
    logger.info(
        f"Epoch {state.epoch}/{config.training.total_epochs} [{phase}] "
        f"physics={row['physics_loss']:.4e} consistency={row['consistency_loss']:.4e} collision={row['collision_pct']:.1f}%"
    )
    return row


def _checkpoint(out: Path, model: GarmentModel, state: TrainState, config: RunConfig) -> None:
    save_train_state(out / "checkpoints" / f"epoch_{state.epoch:05d}.bnck", model, state)
    save_train_state(out / STATE_FILE, model, state)
    atomic_write_text(out / LOSS_LOG, render_loss_log(state.history, config))
    logger.debug(f"Checkpoint written at epoch {state.epoch}")


def train(
    config: RunConfig,
    asset_dirs: Sequence[PathLike],
    out_dir: PathLike,
    resume: Optional[PathLike] = None,
) -> TrainResult:
    """
    Run the schedule up to ``total_epochs``.

    Raises:
        AssetValidationError / ConfigValidationError: before any training
        TrainingError: the loss stayed non-finite after repeated lr halvings
    """
    out = Path(out_dir)
    identities = load_identities(asset_dirs, config)
    model = GarmentModel(config.networks, identities[0].rig.bone_count, config.seed)
    state = load_train_state(resume, model) if resume else TrainState()
    training = config.training
    logger.info(
        f"Training {len(identities)} identities: epochs {state.epoch}→{training.total_epochs} "
        f"(warm-up {training.warmup_epochs}), {model.params.count()} parameters"
    )
    while state.epoch < training.total_epochs:
        run_epoch(model, identities, state, config)
        if state.epoch % training.checkpoint_every == 0:
            _checkpoint(out, model, state, config)

    save_train_state(out / STATE_FILE, model, state)
    atomic_write_text(out / LOSS_LOG, render_loss_log(state.history, config))
    model_path = out / MODEL_FILE
    model.save(model_path)
    logger.info(f"Training finished; model written to {model_path}")
    return TrainResult(model=model, state=state, model_path=model_path, loss_log=out / LOSS_LOG)
