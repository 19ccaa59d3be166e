# Area: Geometry
# PRD: docs/prd-bonecloth.md
"""
bonecloth._geometry.uv — Texel mapping for the garment UV atlas
===============================================================

A TexelMap is built once per mesh and grid size:

- raster: (H·W, V) sparse matrix; row t holds the barycentric weights of
  the UV triangle that contains texel t's center (first face in face
  order wins); rows of unoccupied texels are empty.
- sample: (V, H·W) sparse matrix; row v holds bilinear weights at the
  vertex's UV coordinate over occupied texels, renormalized. Vertices
  with several UV corners (seams) average their samples.

Texel (i, j) has its center at u = (j + 0.5) / W, v = (i + 0.5) / H.
Because both maps are constant linear operators, rasterize and sample
are single sparse products, and the network stages can differentiate
through them with ``spmm``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

from ..errors import DegenerateInputError, ShapeMismatchError
from .mesh import TriMesh

logger = logging.getLogger("bonecloth.geometry")

_INSIDE_TOL = 1e-12
_AREA_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class UvGrid:
    """H×W×C texel data plus the occupancy mask."""

    data: np.ndarray
    occupancy: np.ndarray

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True, eq=False)
class TexelMap:
    """Precomputed rasterize/sample operators for one mesh and grid."""

    height: int
    width: int
    vertex_count: int
    texel_face: np.ndarray
    texel_bary: np.ndarray
    raster: sp.csr_matrix
    sample: sp.csr_matrix
    fallback_vertices: np.ndarray
    skipped_faces: np.ndarray

    @property
    def occupancy(self) -> np.ndarray:
        return (self.texel_face >= 0).reshape(self.height, self.width)

    @property
    def occupied_flat(self) -> np.ndarray:
        return self.texel_face >= 0


def _barycentric(tri: np.ndarray, points: np.ndarray) -> Tuple[np.ndarray, float]:
    """Barycentric coordinates of 2-D *points* in triangle *tri* (3, 2)."""
    a, b, c = tri
    v0, v1 = b - a, c - a
    det = v0[0] * v1[1] - v1[0] * v0[1]
    if abs(det) < _AREA_TOL:
        return np.zeros((len(points), 3)), det
    d = points - a
    l1 = (d[:, 0] * v1[1] - v1[0] * d[:, 1]) / det
    l2 = (v0[0] * d[:, 1] - d[:, 0] * v0[1]) / det
    return np.stack([1.0 - l1 - l2, l1, l2], axis=1), det


def build_texel_map(mesh: TriMesh, height: int, width: int) -> TexelMap:
    """
    Assign texel centers to UV triangles and build both sparse operators.

    Degenerate (zero-area) UV triangles are skipped with a warning.
    """
    if height < 1 or width < 1:
        raise DegenerateInputError("build_texel_map", f"grid {height}x{width} must be at least 1x1")
    texel_face = np.full(height * width, -1, dtype=np.int64)
    texel_bary = np.zeros((height * width, 3))
    skipped: List[int] = []

    for f in range(mesh.face_count):
        tri = mesh.uv_coords[f]
        lo, hi = tri.min(axis=0), tri.max(axis=0)
        j0 = max(int(np.ceil(lo[0] * width - 0.5)), 0)
        j1 = min(int(np.floor(hi[0] * width - 0.5)), width - 1)
        i0 = max(int(np.ceil(lo[1] * height - 0.5)), 0)
        i1 = min(int(np.floor(hi[1] * height - 0.5)), height - 1)
        a, b, c = tri
        if abs((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])) < _AREA_TOL:
            skipped.append(f)
            continue
        if j1 < j0 or i1 < i0:
            continue
        ii, jj = np.meshgrid(np.arange(i0, i1 + 1), np.arange(j0, j1 + 1), indexing="ij")
        ii, jj = ii.reshape(-1), jj.reshape(-1)
        centers = np.stack([(jj + 0.5) / width, (ii + 0.5) / height], axis=1)
        bary, _ = _barycentric(tri, centers)
        inside = np.all(bary >= -_INSIDE_TOL, axis=1)
        flat = ii * width + jj
        free = texel_face[flat] < 0
        take = inside & free
        texel_face[flat[take]] = f
        texel_bary[flat[take]] = np.clip(bary[take], 0.0, None)

    if skipped:
        logger.warning(f"{len(skipped)} degenerate UV triangles skipped (first face {skipped[0]})")

    occupied = np.flatnonzero(texel_face >= 0)
    rows = np.repeat(occupied, 3)
    cols = mesh.faces[texel_face[occupied]].reshape(-1)
    vals = texel_bary[occupied].reshape(-1)
    raster = sp.csr_matrix((vals, (rows, cols)), shape=(height * width, mesh.vertex_count))

    sample, fallback = _build_sample(mesh, texel_face >= 0, height, width)
    return TexelMap(
        height=height,
        width=width,
        vertex_count=mesh.vertex_count,
        texel_face=texel_face,
        texel_bary=texel_bary,
        raster=raster,
        sample=sample,
        fallback_vertices=fallback,
        skipped_faces=np.asarray(skipped, dtype=np.int64),
    )


def _build_sample(mesh: TriMesh, occupied: np.ndarray, height: int, width: int):
    # unique (vertex, uv) pairs from face corners
    corner_vertex = mesh.faces.reshape(-1)
    corner_uv = mesh.uv_coords.reshape(-1, 2)
    pairs = np.unique(np.column_stack([corner_vertex, corner_uv]), axis=0)

    occupied_idx = np.flatnonzero(occupied)
    tree = None
    if occupied_idx.size:
        oi, oj = np.divmod(occupied_idx, width)
        tree = cKDTree(np.column_stack([(oj + 0.5) / width, (oi + 0.5) / height]))

    rows: List[int] = []
    cols: List[int] = []
    vals: List[float] = []
    per_vertex = np.zeros(mesh.vertex_count)
    fallback = set()
    for vid, u, v in pairs:
        vid = int(vid)
        x, y = u * width - 0.5, v * height - 0.5
        j0, i0 = int(np.floor(x)), int(np.floor(y))
        fx, fy = x - j0, y - i0
        entries = []
        for di, dj, w in ((0, 0, (1 - fy) * (1 - fx)), (0, 1, (1 - fy) * fx), (1, 0, fy * (1 - fx)), (1, 1, fy * fx)):
            i, j = i0 + di, j0 + dj
            if 0 <= i < height and 0 <= j < width and w > 0 and occupied[i * width + j]:
                entries.append((i * width + j, w))
        total = sum(w for _, w in entries)
        if total <= 0:
            if tree is None:
                continue
            _, nearest = tree.query([u, v])
            entries, total = [(int(occupied_idx[nearest]), 1.0)], 1.0
            fallback.add(vid)
        for t, w in entries:
            rows.append(vid)
            cols.append(t)
            vals.append(w / total)
        per_vertex[vid] += 1

    counts = np.bincount(rows, minlength=mesh.vertex_count) if rows else np.zeros(mesh.vertex_count)
    scale = np.where(per_vertex > 0, 1.0 / np.maximum(per_vertex, 1), 0.0)
    vals_arr = np.asarray(vals) * scale[np.asarray(rows, dtype=np.int64)] if rows else np.zeros(0)
    sample = sp.csr_matrix(
        (vals_arr, (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
        shape=(mesh.vertex_count, height * width),
    )
    missing = np.flatnonzero(counts == 0)
    if missing.size:
        logger.warning(f"{missing.size} vertices have no UV sample (first index {int(missing[0])})")
    if fallback:
        logger.warning(
            f"{len(fallback)} vertices sampled from the nearest occupied texel "
            f"(first index {min(fallback)})"
        )
    return sample, np.asarray(sorted(fallback), dtype=np.int64)


def rasterize_to_uv(texmap: TexelMap, values: np.ndarray) -> UvGrid:
    """Barycentric interpolation of per-vertex *values* (V, C) into the grid."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    if values.shape[0] != texmap.vertex_count:
        raise ShapeMismatchError("rasterize_to_uv", [values.shape, (texmap.vertex_count,)])
    data = (texmap.raster @ values).reshape(texmap.height, texmap.width, values.shape[1])
    return UvGrid(data=data, occupancy=texmap.occupancy)


def sample_from_uv(texmap: TexelMap, grid: UvGrid) -> np.ndarray:
    """Per-vertex bilinear readback over occupied texels, (V, C)."""
    if grid.data.shape[:2] != (texmap.height, texmap.width):
        raise ShapeMismatchError("sample_from_uv", [grid.data.shape, (texmap.height, texmap.width)])
    flat = grid.data.reshape(texmap.height * texmap.width, grid.channels)
    return texmap.sample @ flat
