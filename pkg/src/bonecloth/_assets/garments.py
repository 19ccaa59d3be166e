# Area: Assets
# PRD: docs/prd-bonecloth.md
"""Procedural garment templates (grid swatches and tubes) with pinned sets."""

from __future__ import annotations

from typing import Tuple

import numpy as np

from .._geometry.mesh import TriMesh
from .bodies import ARM_RADIUS, ARM_Y, BAR_RADIUS, BAR_Y

# clearance between a pinned edge and the surface it hangs from
HANG_GAP = 0.01


def grid_swatch(rows: int, cols: int, width: float, height: float, top_left) -> TriMesh:
    """
    Vertical rows×cols grid in the z = const plane, row 0 on top.
    Two triangles per quad: 2 (rows−1)(cols−1) faces.
    """
    x0, y0, z0 = top_left
    i, j = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
    vertices = np.column_stack([
        x0 + width * j.ravel() / (cols - 1),
        y0 - height * i.ravel() / (rows - 1),
        np.full(rows * cols, z0),
    ])
    uv = np.column_stack([j.ravel() / (cols - 1), 1.0 - i.ravel() / (rows - 1)])
    faces = []
    for r in range(rows - 1):
        for c in range(cols - 1):
            v00, v01 = r * cols + c, r * cols + c + 1
            v10, v11 = v00 + cols, v01 + cols
            faces.append((v00, v10, v01))
            faces.append((v01, v10, v11))
    faces = np.asarray(faces, dtype=np.int64)
    return TriMesh(vertices, faces, uv[faces])


def tube(rings: int, segments: int, top_y: float, bottom_y: float, top_radius: float, bottom_radius: float) -> TriMesh:
    """
    Open tube around the y axis, ring 0 on top. The UV seam sits at
    θ = 0: faces closing the ring use u = 1 for the wrapped corner.
    """
    t = np.arange(rings) / (rings - 1)
    heights = top_y + (bottom_y - top_y) * t
    radii = top_radius + (bottom_radius - top_radius) * t
    theta = 2 * np.pi * np.arange(segments) / segments
    vertices = np.concatenate([
        np.column_stack([r * np.cos(theta), np.full(segments, y), r * np.sin(theta)])
        for y, r in zip(heights, radii)
    ])
    faces, uvs = [], []
    for r in range(rings - 1):
        v_top, v_bottom = 1.0 - r / (rings - 1), 1.0 - (r + 1) / (rings - 1)
        for s in range(segments):
            sn = (s + 1) % segments
            a, b = r * segments + s, r * segments + sn
            c, d = a + segments, b + segments
            u0, u1 = s / segments, (s + 1) / segments
            faces.append((a, c, b))
            uvs.append(((u0, v_top), (u0, v_bottom), (u1, v_top)))
            faces.append((b, c, d))
            uvs.append(((u1, v_top), (u0, v_bottom), (u1, v_bottom)))
    return TriMesh(vertices, np.asarray(faces, dtype=np.int64), np.asarray(uvs))


def hanging_swatch(rows: int, cols: int, size: float) -> Tuple[TriMesh, np.ndarray]:
    """Square swatch hanging under the bar; the top row is pinned."""
    top = BAR_Y - BAR_RADIUS - HANG_GAP
    mesh = grid_swatch(rows, cols, size, size, (-size / 2, top, 0.0))
    return mesh, np.arange(cols)


def arm_swatch(rows: int, cols: int, size: float) -> Tuple[TriMesh, np.ndarray]:
    """Swatch hanging under the arm from shoulder to wrist; the top row is pinned."""
    top = ARM_Y - ARM_RADIUS - HANG_GAP
    mesh = grid_swatch(rows, cols, 0.48, size, (0.22, top, 0.0))
    return mesh, np.arange(cols)


def skirt(rings: int, segments: int) -> Tuple[TriMesh, np.ndarray]:
    """Flared skirt from the waist to above the knee; the waistband ring is pinned."""
    mesh = tube(rings, segments, top_y=1.12, bottom_y=0.62, top_radius=0.15, bottom_radius=0.45)
    return mesh, np.arange(segments)


def shirt(rings: int, segments: int) -> Tuple[TriMesh, np.ndarray]:
    """Straight torso tube between the arms; the top ring is pinned."""
    mesh = tube(rings, segments, top_y=1.38, bottom_y=1.12, top_radius=0.165, bottom_radius=0.165)
    return mesh, np.arange(segments)
