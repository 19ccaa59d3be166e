# Area: Physics
# PRD: docs/prd-bonecloth.md
"""Cloth material and the per-garment constants the losses need."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..config import LossWeightConfig, MaterialConfig
from ..errors import DegenerateInputError
from .._geometry.laplacian import laplacian_matrix
from .._geometry.mesh import TriMesh

logger = logging.getLogger("bonecloth.physics")

# ClothMaterial and LossWeights are the validated config sections
ClothMaterial = MaterialConfig
LossWeights = LossWeightConfig

_NORMAL_EPS = 1e-12


def vertex_masses(mesh: TriMesh, density: float) -> np.ndarray:
    """density × one third of the incident rest triangle area (kg)."""
    return density * mesh.vertex_areas()


def dihedral_angles(positions: np.ndarray, stencils: np.ndarray) -> np.ndarray:
    """Signed dihedral angle at each (i, j, k, l) interior-edge stencil."""
    xi, xj, xk, xl = (positions[stencils[:, c]] for c in range(4))
    e = xj - xi
    n1 = np.cross(e, xk - xi)
    n2 = np.cross(xl - xi, e)
    e_hat = e / np.linalg.norm(e, axis=1, keepdims=True)
    return np.arctan2(np.einsum("ij,ij->i", np.cross(n1, n2), e_hat), np.einsum("ij,ij->i", n1, n2))


@dataclass(frozen=True, eq=False)
class GarmentConstants:
    """Rest-state quantities of one garment, computed once."""

    edges: np.ndarray
    rest_lengths: np.ndarray
    bend_stencils: np.ndarray
    rest_angles: np.ndarray
    laplacian: sp.csr_matrix
    masses: np.ndarray
    pinned: np.ndarray

    @property
    def vertex_count(self) -> int:
        return len(self.masses)


def garment_constants(mesh: TriMesh, density: float, pinned=None) -> GarmentConstants:
    """
    Raises:
        DegenerateInputError: an edge of zero rest length
    """
    rest_lengths = mesh.edge_lengths()
    bad = np.flatnonzero(rest_lengths <= 0)
    if bad.size:
        raise DegenerateInputError("loss_stretch", "zero rest length edge", index=int(bad[0]))
    stencils = mesh.interior_edges()
    if len(stencils):
        xi, xj, xk, xl = (mesh.vertices[stencils[:, c]] for c in range(4))
        e = xj - xi
        n1 = np.linalg.norm(np.cross(e, xk - xi), axis=1)
        n2 = np.linalg.norm(np.cross(xl - xi, e), axis=1)
        keep = (n1 > _NORMAL_EPS) & (n2 > _NORMAL_EPS)
        if not keep.all():
            logger.warning(f"{int((~keep).sum())} bend stencils with degenerate normals skipped")
        stencils = stencils[keep]
    rest_angles = dihedral_angles(mesh.vertices, stencils) if len(stencils) else np.zeros(0)
    pinned_idx = np.zeros(0, dtype=np.int64) if pinned is None else np.asarray(pinned, dtype=np.int64)
    return GarmentConstants(
        edges=mesh.edges,
        rest_lengths=rest_lengths,
        bend_stencils=stencils,
        rest_angles=rest_angles,
        laplacian=laplacian_matrix(mesh),
        masses=vertex_masses(mesh, density),
        pinned=pinned_idx,
    )
