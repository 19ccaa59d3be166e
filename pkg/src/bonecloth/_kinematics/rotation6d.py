# Area: Kinematics
# PRD: docs/prd-bonecloth.md
"""
bonecloth._kinematics.rotation6d — 6D rotation representation
=============================================================

A rotation is encoded by its first two columns (a, b). Decoding is
Gram-Schmidt: c1 = a/|a|, c2 = normalize(b − (b·c1) c1), c3 = c1 × c2.

Matrices leave the tensor path as flat (B, 9) rows in column-major
order: ``flat[3j + i] = R[i, j]``. The numpy entry point runs the same
tensor code in float64 without a tape.
"""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateInputError, ShapeMismatchError
from .._diffcore import ops
from .._diffcore.tape import Tensor, precision

# minimum norm of the first column and of the orthogonalized second column
DEGENERATE_EPS = 1e-8


def encode_6d(rotations: np.ndarray) -> np.ndarray:
    """(..., 3, 3) rotations → (..., 6): column 0 then column 1."""
    r = np.asarray(rotations)
    return np.concatenate([r[..., :, 0], r[..., :, 1]], axis=-1)


def flat_to_matrix(flat: np.ndarray) -> np.ndarray:
    """Column-major (..., 9) rows back to (..., 3, 3)."""
    flat = np.asarray(flat)
    return np.swapaxes(flat.reshape(flat.shape[:-1] + (3, 3)), -1, -2)


def matrix_to_flat(rotations: np.ndarray) -> np.ndarray:
    r = np.asarray(rotations)
    return np.swapaxes(r, -1, -2).reshape(r.shape[:-2] + (9,))


def _check_degenerate(r6: np.ndarray) -> None:
    a, b = r6[:, :3].astype(np.float64), r6[:, 3:].astype(np.float64)
    norm_a = np.linalg.norm(a, axis=1)
    bad = np.flatnonzero(~np.isfinite(norm_a) | (norm_a < DEGENERATE_EPS))
    if bad.size:
        raise DegenerateInputError("rotation_6d_to_matrix", "zero first column in 6D rotation of bone", index=int(bad[0]))
    c1 = a / norm_a[:, None]
    resid = b - np.sum(b * c1, axis=1, keepdims=True) * c1
    bad = np.flatnonzero(~np.isfinite(resid).all(axis=1) | (np.linalg.norm(resid, axis=1) < DEGENERATE_EPS))
    if bad.size:
        raise DegenerateInputError("rotation_6d_to_matrix", "collinear columns in 6D rotation of bone", index=int(bad[0]))


def rotation_6d_to_matrix_tensor(r6: Tensor) -> Tensor:
    """
    Differentiable Gram-Schmidt over (B, 6) → column-major (B, 9).

    Raises:
        ShapeMismatchError: input is not (B, 6)
        DegenerateInputError: collinear or zero columns, naming the bone
    """
    if r6.ndim != 2 or r6.shape[1] != 6:
        raise ShapeMismatchError("rotation_6d_to_matrix", [r6.shape], "(B, 6)")
    _check_degenerate(r6.data)
    count = r6.shape[0]
    a = ops.slice_last(r6, 0, 3)
    b = ops.slice_last(r6, 3, 6)
    c1 = ops.div(a, ops.reshape(ops.norm(a), (count, 1)))
    proj = ops.reshape(ops.dot(b, c1), (count, 1))
    resid = ops.sub(b, ops.mul(c1, proj))
    c2 = ops.div(resid, ops.reshape(ops.norm(resid), (count, 1)))
    c3 = ops.cross(c1, c2)
    return ops.concat([c1, c2, c3], axis=-1)


def rotation_6d_to_matrix(r6: np.ndarray) -> np.ndarray:
    """(6,) or (B, 6) → (3, 3) or (B, 3, 3), computed in float64."""
    r6 = np.asarray(r6, dtype=np.float64)
    single = r6.ndim == 1
    with precision("float64"):
        flat = rotation_6d_to_matrix_tensor(Tensor(r6.reshape(-1, 6))).data
    matrices = flat_to_matrix(flat)
    return matrices[0] if single else matrices


def apply_flat(rot_flat: Tensor, points: Tensor) -> Tensor:
    """Rotate each row of *points* (N, 3) by the matching (N, 9) matrix."""
    out = None
    for j in range(3):
        column = ops.slice_last(rot_flat, 3 * j, 3 * j + 3)
        term = ops.mul(column, ops.slice_last(points, j, j + 1))
        out = term if out is None else ops.add(out, term)
    return out
