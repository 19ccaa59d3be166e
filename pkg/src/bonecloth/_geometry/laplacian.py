# Area: Geometry
# PRD: docs/prd-bonecloth.md
"""Uniform (umbrella) mesh Laplacian."""

from __future__ import annotations

import logging

import numpy as np
import scipy.sparse as sp

from ..errors import ShapeMismatchError
from .mesh import TriMesh

logger = logging.getLogger("bonecloth.geometry")


def laplacian_matrix(mesh: TriMesh) -> sp.csr_matrix:
    """
    Sparse L with (L p)_v = p_v − mean of one-ring neighbors.

    Rows of isolated vertices are zero (residual defined as 0); each one
    is reported with a warning.
    """
    n = mesh.vertex_count
    i, j = mesh.edges[:, 0], mesh.edges[:, 1]
    adjacency = sp.coo_matrix(
        (np.ones(2 * len(i)), (np.concatenate([i, j]), np.concatenate([j, i]))), shape=(n, n)
    ).tocsr()
    degree = np.asarray(adjacency.sum(axis=1)).reshape(-1)
    isolated = degree == 0
    if isolated.any():
        logger.warning(
            f"{int(isolated.sum())} isolated vertices; Laplacian residual set to zero "
            f"(first index {int(np.flatnonzero(isolated)[0])})"
        )
    inv_degree = np.where(isolated, 0.0, 1.0 / np.maximum(degree, 1))
    identity = sp.diags((~isolated).astype(np.float64))
    return (identity - sp.diags(inv_degree) @ adjacency).tocsr()


def laplacian_residual(mesh: TriMesh, positions: np.ndarray) -> np.ndarray:
    positions = np.asarray(positions, dtype=np.float64)
    if positions.shape != (mesh.vertex_count, 3):
        raise ShapeMismatchError("laplacian_residual", [positions.shape, (mesh.vertex_count, 3)])
    return laplacian_matrix(mesh) @ positions
