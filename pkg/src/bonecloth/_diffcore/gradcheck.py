# Area: Diffcore
# PRD: docs/prd-bonecloth.md
"""Central finite-difference check of tape gradients (float64)."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .tape import Tape, Tensor, backward, precision


def gradcheck(
    fn: Callable[..., Tensor],
    inputs: Sequence[np.ndarray],
    h: float = 1e-3,
) -> float:
    """
    Compare reverse-mode gradients of scalar ``fn(*tensors)`` against
    central differences for every input element.

    Returns the worst relative error ``|a - n| / max(|a|, |n|)`` over
    all inputs, measured per input tensor in the Euclidean norm.
    """
    with precision("float64"):
        leaves = [Tensor(np.array(x, dtype=np.float64), requires_grad=True) for x in inputs]
        with Tape() as tape:
            out = fn(*leaves)
        backward(tape, out)

        worst = 0.0
        for leaf in leaves:
            analytic = np.zeros(leaf.shape) if leaf.grad is None else leaf.grad
            numeric = np.zeros(leaf.shape)
            flat = leaf.data.reshape(-1)
            for i in range(flat.size):
                original = flat[i]
                flat[i] = original + h
                plus = float(fn(*leaves).data)
                flat[i] = original - h
                minus = float(fn(*leaves).data)
                flat[i] = original
                numeric.reshape(-1)[i] = (plus - minus) / (2 * h)
            scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric))
            if scale < 1e-12:
                continue
            worst = max(worst, float(np.linalg.norm(analytic - numeric) / scale))
    return worst
