# Area: Diffcore
# PRD: docs/prd-bonecloth.md
"""
bonecloth._diffcore.tape — Tensors and the differentiation tape
===============================================================

A Tensor wraps a dense numpy array. While a Tape is active (``with
Tape() as tape:``), every op whose inputs require gradients appends a
record (output, inputs, backward rule) to the tape. Records are appended
in execution order, which is a topological order of the computation, so
``backward`` walks them in reverse exactly once.

Without an active tape, ops compute the same values and record nothing;
this is the inference path.
"""

from __future__ import annotations

import contextvars
import logging
from contextlib import contextmanager
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import TapeError

logger = logging.getLogger("bonecloth.diffcore")

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_ACTIVE_TAPE: contextvars.ContextVar[Optional["Tape"]] = contextvars.ContextVar(
    "bonecloth_active_tape", default=None
)
_DTYPE: contextvars.ContextVar[np.dtype] = contextvars.ContextVar(
    "bonecloth_dtype", default=np.dtype(np.float32)
)


def current_dtype() -> np.dtype:
    return _DTYPE.get()


@contextmanager
def precision(dtype: str) -> Iterator[None]:
    """Select the float type for tensors created inside the block.

    float32 is the default for parameters and activations; float64 is
    used by gradient checks so finite differences resolve 1e-3 relative
    error.
    """
    token = _DTYPE.set(np.dtype(dtype))
    try:
        yield
    finally:
        _DTYPE.reset(token)


class Tensor:
    """Dense array with optional participation in the active tape."""

    __slots__ = ("data", "requires_grad", "grad", "name", "is_leaf", "__weakref__")

    def __init__(self, data, requires_grad: bool = False, name: Optional[str] = None):
        self.data = np.asarray(data, dtype=current_dtype())
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self.is_leaf = True

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"


class _Record:
    __slots__ = ("out", "inputs", "backward_fn", "op")

    def __init__(self, out: Tensor, inputs: Tuple[Tensor, ...], backward_fn: BackwardFn, op: str):
        self.out = out
        self.inputs = inputs
        self.backward_fn = backward_fn
        self.op = op


class Tape:
    """Topologically ordered operation records for one training step."""

    def __init__(self):
        self._records: List[_Record] = []
        self._consumed = False
        self._token = None

    def __enter__(self) -> "Tape":
        self._token = _ACTIVE_TAPE.set(self)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        _ACTIVE_TAPE.reset(self._token)
        self._token = None
        return False

    def __len__(self) -> int:
        return len(self._records)

    @property
    def consumed(self) -> bool:
        return self._consumed

    def record(self, out: Tensor, inputs: Tuple[Tensor, ...], backward_fn: BackwardFn, op: str) -> None:
        if self._consumed:
            raise TapeError("Cannot record on a consumed tape", operation=op)
        self._records.append(_Record(out, inputs, backward_fn, op))

    def backward(self, output: Tensor) -> Dict[Tensor, np.ndarray]:
        return backward(self, output)


def active_tape() -> Optional[Tape]:
    return _ACTIVE_TAPE.get()


def make_result(data: np.ndarray, inputs: Sequence[Tensor], backward_fn: BackwardFn, op: str) -> Tensor:
    """Wrap *data* as an op output and record it when gradients are needed."""
    out = Tensor.__new__(Tensor)
    out.data = np.asarray(data, dtype=current_dtype())
    out.grad = None
    out.name = None
    out.is_leaf = True
    out.requires_grad = False
    tape = _ACTIVE_TAPE.get()
    if tape is not None and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        out.is_leaf = False
        tape.record(out, tuple(inputs), backward_fn, op)
    return out


def backward(tape: Tape, output: Tensor) -> Dict[Tensor, np.ndarray]:
    """
    Reverse-mode pass from a scalar *output* over *tape*.

    Leaf gradients are accumulated into ``Tensor.grad`` (repeated calls on
    fresh tapes without ``zero_grad`` accumulate) and also returned.

    Raises:
        TapeError: if the output is not scalar or the tape was consumed
    """
    if tape.consumed:
        raise TapeError("Tape already consumed by a previous backward pass", operation="backward")
    if output.data.size != 1:
        raise TapeError(
            f"backward requires a scalar output, got shape {output.shape}",
            operation="backward",
        )
    tape._consumed = True
    if not output.requires_grad:
        return {}

    grads: Dict[int, np.ndarray] = {id(output): np.ones_like(output.data)}
    leaves: Dict[int, Tensor] = {}
    if output.is_leaf:
        leaves[id(output)] = output

    for rec in reversed(tape._records):
        g = grads.pop(id(rec.out), None)
        if g is None:
            continue
        input_grads = rec.backward_fn(g)
        for inp, ig in zip(rec.inputs, input_grads):
            if ig is None or not inp.requires_grad:
                continue
            key = id(inp)
            if key in grads:
                grads[key] = grads[key] + ig
            else:
                grads[key] = ig
            if inp.is_leaf:
                leaves[key] = inp

    result: Dict[Tensor, np.ndarray] = {}
    for key, leaf in leaves.items():
        g = np.asarray(grads[key], dtype=leaf.data.dtype).reshape(leaf.shape)
        leaf.grad = g.copy() if leaf.grad is None else leaf.grad + g
        result[leaf] = g
    tape._records.clear()
    return result
