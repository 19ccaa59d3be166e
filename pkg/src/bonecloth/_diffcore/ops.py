# Area: Diffcore
# PRD: docs/prd-bonecloth.md
"""
bonecloth._diffcore.ops — Differentiable operations
===================================================

Every op computes its forward value with numpy and, when a tape is
active and an input requires gradients, records an exact analytic
backward rule.

Shape promotion is limited to three cases: identical shapes, a trailing
suffix (bias add, scalar), and size-1 axes kept by ``keepdims``
reductions. Anything else raises ShapeMismatchError naming the op.

Reductions accumulate in float64 and cast back.
"""

from __future__ import annotations

from typing import Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ShapeMismatchError
from .tape import BackwardFn, Tensor, make_result

ArrayLike = Union[Tensor, np.ndarray, float, int]

_TINY = 1e-30


def as_tensor(x: ArrayLike) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def detach(x: Tensor) -> Tensor:
    """Same values, no gradient path."""
    return Tensor(x.data)


def custom(data: np.ndarray, inputs: Sequence[Tensor], backward_fn: BackwardFn, op: str) -> Tensor:
    """Define an op outside this module (e.g. the capsule distance)."""
    return make_result(data, inputs, backward_fn, op)


# ── broadcasting helpers ──────────────────────────────────────


def _check_broadcast(op: str, a: Tuple[int, ...], b: Tuple[int, ...]) -> None:
    if a == b:
        return
    if len(b) <= len(a) and a[len(a) - len(b):] == b:
        return
    if len(a) <= len(b) and b[len(b) - len(a):] == a:
        return
    if len(a) == len(b) and all(x == y or x == 1 or y == 1 for x, y in zip(a, b)):
        return
    raise ShapeMismatchError(op, [a, b], "equal shapes, trailing bias or keepdims axes")


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    dtype = grad.dtype
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)), dtype=np.float64)
    keep = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if keep:
        grad = grad.sum(axis=keep, keepdims=True, dtype=np.float64)
    return grad.astype(dtype, copy=False).reshape(shape)


# ── elementwise binary ────────────────────────────────────────


def add(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("add", a.shape, b.shape)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return make_result(a.data + b.data, (a, b), backward, "add")


def sub(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("sub", a.shape, b.shape)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return make_result(a.data - b.data, (a, b), backward, "sub")


def mul(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("mul", a.shape, b.shape)

    def backward(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return make_result(a.data * b.data, (a, b), backward, "mul")


def div(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("div", a.shape, b.shape)
    out = a.data / b.data

    def backward(g):
        return _unbroadcast(g / b.data, a.shape), _unbroadcast(-g * out / b.data, b.shape)

    return make_result(out, (a, b), backward, "div")


def scale(a: Tensor, factor: float) -> Tensor:
    """Multiply by a Python scalar constant."""
    c = float(factor)

    def backward(g):
        return (g * c,)

    return make_result(a.data * np.asarray(c, dtype=a.data.dtype), (a,), backward, "scale")


def neg(a: Tensor) -> Tensor:
    return scale(a, -1.0)


def atan2(y: Tensor, x: Tensor) -> Tensor:
    if y.shape != x.shape:
        raise ShapeMismatchError("atan2", [y.shape, x.shape], "equal shapes")
    denom = np.maximum(x.data * x.data + y.data * y.data, _TINY)

    def backward(g):
        return g * x.data / denom, -g * y.data / denom

    return make_result(np.arctan2(y.data, x.data), (y, x), backward, "atan2")


def cross(a: Tensor, b: Tensor) -> Tensor:
    """Cross product along the last axis (size 3)."""
    if a.shape != b.shape or a.shape[-1] != 3:
        raise ShapeMismatchError("cross", [a.shape, b.shape], "equal shapes with last axis 3")

    def backward(g):
        return np.cross(b.data, g), np.cross(g, a.data)

    return make_result(np.cross(a.data, b.data), (a, b), backward, "cross")


# ── elementwise unary ─────────────────────────────────────────


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0

    def backward(g):
        return (g * mask,)

    return make_result(np.where(mask, x.data, 0).astype(x.data.dtype), (x,), backward, "relu")


def square(x: Tensor) -> Tensor:
    def backward(g):
        return (2 * g * x.data,)

    return make_result(x.data * x.data, (x,), backward, "square")


def sqrt(x: Tensor) -> Tensor:
    """Square root of a nonnegative input; backward clamps at zero."""
    out = np.sqrt(np.maximum(x.data, 0))

    def backward(g):
        return (g / (2 * np.maximum(out, _TINY)),)

    return make_result(out, (x,), backward, "sqrt")


def softmax(x: Tensor) -> Tensor:
    """Softmax over the last axis."""
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=-1, keepdims=True, dtype=np.float64).astype(x.data.dtype)

    def backward(g):
        dot = (g * y).sum(axis=-1, keepdims=True, dtype=np.float64).astype(y.dtype)
        return (y * (g - dot),)

    return make_result(y, (x,), backward, "softmax")


def layer_norm(x: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to zero mean and unit variance (no affine)."""
    mu = x.data.mean(axis=-1, keepdims=True, dtype=np.float64)
    centered = x.data - mu.astype(x.data.dtype)
    var = (centered * centered).mean(axis=-1, keepdims=True, dtype=np.float64)
    inv = (1.0 / np.sqrt(var + eps)).astype(x.data.dtype)
    y = centered * inv

    def backward(g):
        g_mean = g.mean(axis=-1, keepdims=True, dtype=np.float64).astype(g.dtype)
        gy_mean = (g * y).mean(axis=-1, keepdims=True, dtype=np.float64).astype(g.dtype)
        return (inv * (g - g_mean - y * gy_mean),)

    return make_result(y, (x,), backward, "layer_norm")


# ── linear algebra ────────────────────────────────────────────


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """2-D matrix product (N, K) @ (K, M)."""
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeMismatchError("matmul", [a.shape, b.shape], "(N, K) @ (K, M)")

    def backward(g):
        return g @ b.data.T, a.data.T @ g

    return make_result(a.data @ b.data, (a, b), backward, "matmul")


def spmm(matrix: sp.spmatrix, x: Tensor) -> Tensor:
    """Constant sparse matrix times a dense 2-D tensor."""
    if x.ndim != 2 or matrix.shape[1] != x.shape[0]:
        raise ShapeMismatchError("spmm", [matrix.shape, x.shape], "(N, K) @ (K, M)")
    dtype = x.data.dtype
    out = np.asarray(matrix @ x.data, dtype=dtype)

    def backward(g):
        return (np.asarray(matrix.T @ g, dtype=dtype),)

    return make_result(out, (x,), backward, "spmm")


def conv2d(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """
    Stride-1, zero-padded 2-D convolution of one (H, W, C_in) image.

    weight has shape (k, k, C_in, C_out) with odd k (1 and 3 are used).
    """
    if x.ndim != 3 or weight.ndim != 4 or weight.shape[2] != x.shape[2] or weight.shape[0] != weight.shape[1] or weight.shape[0] % 2 == 0:
        raise ShapeMismatchError("conv2d", [x.shape, weight.shape], "(H, W, C_in) with (k, k, C_in, C_out), odd k")
    if bias is not None and bias.shape != (weight.shape[3],):
        raise ShapeMismatchError("conv2d", [weight.shape, bias.shape], "bias of shape (C_out,)")
    h, w, c_in = x.shape
    k, c_out = weight.shape[0], weight.shape[3]
    pad = k // 2
    if pad:
        padded = np.pad(x.data, ((pad, pad), (pad, pad), (0, 0)))
    else:
        padded = x.data
    # (H, W, C, k, k) -> (H, W, k, k, C) -> rows of receptive fields
    windows = sliding_window_view(padded, (k, k), axis=(0, 1)).transpose(0, 1, 3, 4, 2)
    patches = np.ascontiguousarray(windows).reshape(h * w, k * k * c_in)
    wmat = weight.data.reshape(k * k * c_in, c_out)
    out = patches @ wmat
    if bias is not None:
        out = out + bias.data
    out = out.reshape(h, w, c_out)

    def backward(g):
        g2 = g.reshape(h * w, c_out)
        grad_w = (patches.T @ g2).reshape(weight.shape)
        dpatches = (g2 @ wmat.T).reshape(h, w, k, k, c_in)
        grad_padded = np.zeros(padded.shape, dtype=g.dtype)
        for di in range(k):
            for dj in range(k):
                grad_padded[di:di + h, dj:dj + w] += dpatches[:, :, di, dj, :]
        grad_x = grad_padded[pad:pad + h, pad:pad + w] if pad else grad_padded
        grads = [grad_x, grad_w]
        if bias is not None:
            grads.append(g2.sum(axis=0, dtype=np.float64).astype(g.dtype))
        return grads

    inputs = (x, weight) if bias is None else (x, weight, bias)
    return make_result(out, inputs, backward, "conv2d")


# ── indexing ──────────────────────────────────────────────────


def gather_rows(x: Tensor, index: np.ndarray) -> Tensor:
    """Rows ``x[index]``; backward scatters gradients back with addition."""
    index = np.asarray(index, dtype=np.int64)
    if index.size and (index.min() < 0 or index.max() >= x.shape[0]):
        raise ShapeMismatchError("gather_rows", [x.shape, index.shape], "indices within the first axis")

    def backward(g):
        grad = np.zeros(x.shape, dtype=np.float64)
        np.add.at(grad, index, g)
        return (grad.astype(g.dtype),)

    return make_result(x.data[index], (x,), backward, "gather_rows")


def scatter_add_rows(x: Tensor, index: np.ndarray, rows: int) -> Tensor:
    """Sum rows of *x* into ``rows`` output rows at positions *index*."""
    index = np.asarray(index, dtype=np.int64)
    if index.shape != (x.shape[0],) or (index.size and (index.min() < 0 or index.max() >= rows)):
        raise ShapeMismatchError("scatter_add_rows", [x.shape, index.shape], f"one target row in [0, {rows}) per input row")
    out = np.zeros((rows,) + x.shape[1:], dtype=np.float64)
    np.add.at(out, index, x.data)

    def backward(g):
        return (g[index],)

    return make_result(out.astype(x.data.dtype), (x,), backward, "scatter_add_rows")


def reshape(x: Tensor, shape: Tuple[int, ...]) -> Tensor:
    try:
        out = x.data.reshape(shape)
    except ValueError:
        raise ShapeMismatchError("reshape", [x.shape, tuple(shape)], "same element count") from None

    def backward(g):
        return (g.reshape(x.shape),)

    return make_result(out, (x,), backward, "reshape")


def slice_last(x: Tensor, start: int, stop: int) -> Tensor:
    """Columns ``start:stop`` of the last axis."""
    if not 0 <= start < stop <= x.shape[-1]:
        raise ShapeMismatchError("slice_last", [x.shape], f"0 <= {start} < {stop} <= last axis")

    def backward(g):
        grad = np.zeros(x.shape, dtype=g.dtype)
        grad[..., start:stop] = g
        return (grad,)

    return make_result(x.data[..., start:stop], (x,), backward, "slice_last")


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    try:
        out = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError:
        raise ShapeMismatchError("concat", [t.shape for t in tensors], f"equal shapes off axis {axis}") from None
    sizes = [t.shape[axis] for t in tensors]
    bounds = np.cumsum(sizes)[:-1]

    def backward(g):
        return np.split(g, bounds, axis=axis)

    return make_result(out, tensors, backward, "concat")


# ── reductions ────────────────────────────────────────────────


def sum(x: Tensor, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:  # noqa: A001
    out = x.data.sum(axis=axis, keepdims=keepdims, dtype=np.float64).astype(x.data.dtype)

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape).astype(g.dtype),)

    return make_result(out, (x,), backward, "sum")


def mean(x: Tensor, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:
    count = x.data.size if axis is None else x.shape[axis]
    out = x.data.mean(axis=axis, keepdims=keepdims, dtype=np.float64).astype(x.data.dtype)

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g / count, x.shape).astype(g.dtype),)

    return make_result(out, (x,), backward, "mean")


def norm(x: Tensor, eps: float = 0.0) -> Tensor:
    """Euclidean norm over the last axis, ``sqrt(sum(x²) + eps)``."""
    squared = sum(square(x), axis=-1)
    if eps:
        squared = add(squared, Tensor(np.asarray(eps)))
    return sqrt(squared)


def dot(a: Tensor, b: Tensor) -> Tensor:
    """Row-wise inner product over the last axis."""
    return sum(mul(a, b), axis=-1)
