# Area: Diffcore
# PRD: docs/prd-bonecloth.md
"""Reverse-mode differentiation over dense numpy arrays."""

from .tape import Tape, Tensor, backward, precision, current_dtype, active_tape
from . import ops
from .ops import detach
from .params import ParamStore, kaiming_uniform
from .optim import AdamState, adam_step
from .checkpoint import save_checkpoint, load_checkpoint
from .gradcheck import gradcheck

__all__ = [
    "Tape",
    "Tensor",
    "backward",
    "precision",
    "current_dtype",
    "active_tape",
    "ops",
    "detach",
    "ParamStore",
    "kaiming_uniform",
    "AdamState",
    "adam_step",
    "save_checkpoint",
    "load_checkpoint",
    "gradcheck",
]
