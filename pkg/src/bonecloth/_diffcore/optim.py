# Area: Diffcore
# PRD: docs/prd-bonecloth.md
"""
bonecloth._diffcore.optim — Adam with bias correction
=====================================================

Updates parameters in place under the single-writer contract. A
parameter whose gradient contains NaN or Inf keeps its value and its
moments for that step; the skip is counted and logged.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional

import numpy as np

from ..errors import ShapeMismatchError
from .tape import Tensor

logger = logging.getLogger("bonecloth.diffcore")


@dataclass
class AdamState:
    """First/second moments per parameter name and the step counter."""
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0
    skipped: int = 0


def adam_step(
    params: Mapping[str, Tensor],
    grads: Mapping[str, Optional[np.ndarray]],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> AdamState:
    """
    One Adam update of every parameter that has a gradient.

    Parameters with no gradient (``None`` or absent) are left alone; the
    shared step counter still advances.
    """
    state.step += 1
    t = state.step
    bias1 = 1.0 - beta1 ** t
    bias2 = 1.0 - beta2 ** t
    for name, param in params.items():
        grad = grads.get(name)
        if grad is None:
            continue
        if grad.shape != param.shape:
            raise ShapeMismatchError("adam_step", [param.shape, grad.shape], name)
        if not np.all(np.isfinite(grad)):
            state.skipped += 1
            logger.warning(f"Non-finite gradient for '{name}'; update skipped")
            continue
        dtype = param.data.dtype
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None:
            m = np.zeros_like(param.data)
            v = np.zeros_like(param.data)
        m = (beta1 * m + (1.0 - beta1) * grad).astype(dtype)
        v = (beta2 * v + (1.0 - beta2) * grad * grad).astype(dtype)
        state.m[name] = m
        state.v[name] = v
        update = lr * (m / bias1) / (np.sqrt(v / bias2) + eps)
        param.data = (param.data - update).astype(dtype)
    return state
