"""Two-phase teacher/student training."""

from .identity import Identity, SequenceFrames, prepare_identity, sequence_frames
from .rollout import (
    PHYSICS_TERMS,
    RolloutResult,
    TeacherHistory,
    rollout_teacher,
    start_history,
    step_teacher,
)
from .state import LOSS_COLUMNS, TrainState, load_train_state, save_train_state
from .steps import StepResult, TrainWindow, joint_step, student_positions, warmup_step
from .trainer import TrainResult, epoch_windows, load_identities, render_loss_log, run_epoch, train

__all__ = [
    "Identity",
    "SequenceFrames",
    "prepare_identity",
    "sequence_frames",
    "PHYSICS_TERMS",
    "RolloutResult",
    "TeacherHistory",
    "rollout_teacher",
    "start_history",
    "step_teacher",
    "LOSS_COLUMNS",
    "TrainState",
    "load_train_state",
    "save_train_state",
    "StepResult",
    "TrainWindow",
    "joint_step",
    "student_positions",
    "warmup_step",
    "TrainResult",
    "epoch_windows",
    "load_identities",
    "render_loss_log",
    "run_epoch",
    "train",
]
