# Area: Training
# PRD: docs/prd-bonecloth.md
"""
bonecloth._training.steps — Warm-up and joint optimisation steps
================================================================

warmup_step: dynamics-teacher rollout → physics loss → Adam on
encoder.* + dynamics.*.

joint_step (supervision "teacher"): identity encoder → teacher rollout
(physics loss) → pose deformer on the same frames → consistency loss
against the detached teacher positions. One backward pass over the sum
updates every group; the teacher sees the consistency loss only through
the shared encoder.

joint_step (supervision "direct"): the teacher keeps training on its own
physics loss, and the physics loss evaluated on the pose deformer's
outputs replaces the consistency loss.

A non-finite loss (or a diverging rollout) rejects the whole step: no
parameter changes, the learning rate is halved once.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..config import RunConfig
from ..errors import NonFiniteError, TrainingError
from ..metrics import collision_error
from .._diffcore import ops
from .._diffcore.optim import adam_step
from .._diffcore.tape import Tape, Tensor
from .._kinematics.rig import correct_weights_tensor
from .._networks.model import TEACHER_PREFIXES, GarmentModel
from .._physics.losses import loss_interp, loss_laplacian, loss_mse, physics_terms, weighted_total
from .identity import Identity, SequenceFrames
from .rollout import PHYSICS_TERMS, gravity_step, mean_terms, physics_weights, rollout_teacher
from .state import TrainState

logger = logging.getLogger("bonecloth.training")

CONSISTENCY_TERMS = ("mse", "laplacian", "interp")
MAX_LR_HALVINGS = 10


@dataclass(frozen=True)
class TrainWindow:
    """One training sample: frames start+1 .. start+length of a sequence."""

    identity: int
    sequence: int
    start: int
    length: int


@dataclass
class StepResult:
    values: Dict[str, float] = field(default_factory=dict)
    collision_pct: float = 0.0
    rejected: bool = False


def _scalar(t: Tensor) -> float:
    return float(np.asarray(t.data, dtype=np.float64).reshape(()))


def consistency_weights(config: RunConfig) -> Dict[str, float]:
    w = config.physics.weights
    return {"mse": w.mse, "laplacian": w.laplacian, "interp": w.interp}


def _reject(state: TrainState, phase: str, reason: str) -> StepResult:
    state.lr_halvings += 1
    logger.warning(f"{phase} step rejected ({reason}); learning rate halved to x{0.5 ** state.lr_halvings:g}")
    if state.lr_halvings > MAX_LR_HALVINGS:
        raise TrainingError(
            f"Loss stayed non-finite after {MAX_LR_HALVINGS} learning-rate halvings",
            operation=phase,
            details={"lr_halvings": state.lr_halvings},
        )
    return StepResult(rejected=True)


def _apply(
    model: GarmentModel,
    params: Dict[str, Tensor],
    grads: Dict[Tensor, np.ndarray],
    state: TrainState,
    config: RunConfig,
) -> None:
    training = config.training
    adam_step(
        params,
        {name: grads.get(t) for name, t in params.items()},
        state.adam,
        lr=state.learning_rate(training.learning_rate),
        beta1=training.beta1,
        beta2=training.beta2,
        eps=training.adam_eps,
    )


def warmup_step(
    model: GarmentModel,
    identity: Identity,
    frames: SequenceFrames,
    window: TrainWindow,
    state: TrainState,
    config: RunConfig,
) -> StepResult:
    """Train the dynamics teacher (encoder + dynamics) on its own integrated positions."""
    model.params.zero_grad()
    try:
        with Tape() as tape:
            rollout = rollout_teacher(model, identity, frames, window.start, window.length, config)
    except NonFiniteError as e:
        return _reject(state, "warmup", str(e))
    loss = _scalar(rollout.loss)
    if not np.isfinite(loss):
        return _reject(state, "warmup", "non-finite physics loss")
    grads = tape.backward(rollout.loss)
    _apply(model, model.group(TEACHER_PREFIXES), grads, state, config)

    values = {name: _scalar(rollout.terms[name]) for name in PHYSICS_TERMS}
    values["physics_loss"] = loss
    final = rollout.positions[-1].data
    return StepResult(
        values=values,
        collision_pct=collision_error(final, identity.sdf(frames, rollout.frames[-1])),
    )


def student_positions(
    model: GarmentModel,
    identity: Identity,
    frames: SequenceFrames,
    t: int,
    weights: Tensor,
    film,
    uv_features: Tensor,
) -> Tensor:
    out = model.deformer(
        identity.rig,
        weights,
        film,
        uv_features,
        identity.texmap,
        frames.transforms_window(t),
        frames.pose_window(t),
    )
    return out.positions


def consistency_terms(
    student: List[Tensor],
    teacher: List[Tensor],
    identity: Identity,
    frames: SequenceFrames,
    indices: List[int],
    config: RunConfig,
) -> Dict[str, Tensor]:
    """Mean MSE, Laplacian and interpenetration terms over the window; teacher positions are detached."""
    per_frame = []
    for p_a, p_c, t in zip(student, teacher, indices):
        per_frame.append({
            "mse": loss_mse(p_a, ops.detach(p_c)),
            "laplacian": loss_laplacian(p_a, identity.constants.laplacian),
            "interp": loss_interp(p_a, identity.sdf(frames, t), config.physics.interp_epsilon),
        })
    return mean_terms(per_frame)


def student_physics_terms(
    model: GarmentModel,
    identity: Identity,
    frames: SequenceFrames,
    window: TrainWindow,
    weights: Tensor,
    film,
    uv_features: Tensor,
    config: RunConfig,
) -> Tuple[Dict[str, Tensor], List[Tensor]]:
    """Physics terms on the pose deformer's own outputs (the direct-supervision variant)."""
    first = window.start - 1
    last = window.start + window.length
    positions = {
        t: student_positions(model, identity, frames, t, weights, film, uv_features)
        for t in range(first, last + 1)
    }
    per_frame = []
    for t in range(window.start + 1, last + 1):
        sdf = identity.sdf(frames, t)
        per_frame.append(physics_terms(
            positions[t],
            positions[t - 1],
            positions[t - 2],
            identity.constants,
            sdf,
            config.physics.material,
            gravity_step(identity, sdf, positions[t - 1].data, config),
        ))
    return mean_terms(per_frame), [positions[t] for t in range(window.start + 1, last + 1)]


def joint_step(
    model: GarmentModel,
    identity: Identity,
    frames: SequenceFrames,
    window: TrainWindow,
    state: TrainState,
    config: RunConfig,
) -> StepResult:
    """One step on the physics + consistency loss (or the direct variant); updates every parameter group."""
    model.params.zero_grad()
    direct = config.training.supervision == "direct"
    student_loss: Optional[Tensor] = None
    try:
        with Tape() as tape:
            ident = model.identity(identity.graph, identity.texmap)
            film = model.film(ident.z)
            weights = correct_weights_tensor(identity.rig.init_weights, ident.delta_weights)
            rollout = rollout_teacher(model, identity, frames, window.start, window.length, config)
            if direct:
                terms, student = student_physics_terms(
                    model, identity, frames, window, weights, film, ident.uv_features, config
                )
                student_loss = weighted_total(terms, physics_weights(config))
            else:
                student = [
                    student_positions(model, identity, frames, t, weights, film, ident.uv_features)
                    for t in rollout.frames
                ]
                terms = consistency_terms(student, rollout.positions, identity, frames, rollout.frames, config)
                student_loss = weighted_total(terms, consistency_weights(config))
            total = ops.add(rollout.loss, student_loss)
    except NonFiniteError as e:
        return _reject(state, "joint", str(e))
    if not np.isfinite(_scalar(total)):
        return _reject(state, "joint", "non-finite physics + consistency loss")
    grads = tape.backward(total)
    _apply(model, dict(model.params.items()), grads, state, config)

    values = {name: _scalar(rollout.terms[name]) for name in PHYSICS_TERMS}
    values["physics_loss"] = _scalar(rollout.loss)
    values["consistency_loss"] = _scalar(student_loss)
    if not direct:
        values.update({name: _scalar(terms[name]) for name in CONSISTENCY_TERMS})
    final = student[-1].data
    return StepResult(
        values=values,
        collision_pct=collision_error(final, identity.sdf(frames, window.start + window.length)),
    )
