# Area: Geometry
# PRD: docs/prd-bonecloth.md
"""
bonecloth._geometry.mesh — Triangle meshes with a UV atlas
==========================================================

TriMesh holds positions, faces and per-face-corner UVs. The unique
edge list is derived on construction. OBJ IO covers the ``v``, ``vt``
and ``f v/vt`` subset; floats are written with 17 significant digits,
so write → read → write is byte-identical.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..errors import AssetValidationError, FileFormatError
from .._shared.binio import PathLike, atomic_write_text

logger = logging.getLogger("bonecloth.geometry")


def unique_edges(faces: np.ndarray) -> np.ndarray:
    """Sorted, deduplicated (i < j) vertex pairs of a face list."""
    if len(faces) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    pairs = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    pairs = np.sort(pairs, axis=1)
    return np.unique(pairs, axis=0).astype(np.int64)


@dataclass(frozen=True, eq=False)
class TriMesh:
    """
    Fixed-topology triangle mesh.

    vertices: (V, 3) float64, meters
    faces: (F, 3) int64
    uv_coords: (F, 3, 2) float64 per face corner, in [0, 1]²
    edges: (E, 2) int64, derived
    """

    vertices: np.ndarray
    faces: np.ndarray
    uv_coords: np.ndarray
    edges: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        vertices = np.asarray(self.vertices, dtype=np.float64)
        faces = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        uv = np.asarray(self.uv_coords, dtype=np.float64)
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise AssetValidationError(
                f"vertices must be (V, 3), got {vertices.shape}", operation="TriMesh"
            )
        if faces.size and (faces.min() < 0 or faces.max() >= len(vertices)):
            raise AssetValidationError("face index out of range", operation="TriMesh")
        if uv.shape != (len(faces), 3, 2):
            raise AssetValidationError(
                f"uv_coords must be (F, 3, 2) = ({len(faces)}, 3, 2), got {uv.shape}",
                operation="TriMesh",
            )
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "faces", faces)
        object.__setattr__(self, "uv_coords", uv)
        object.__setattr__(self, "edges", unique_edges(faces))

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def face_count(self) -> int:
        return len(self.faces)

    def with_vertices(self, vertices: np.ndarray) -> "TriMesh":
        """Same topology and atlas, new positions."""
        return TriMesh(vertices, self.faces, self.uv_coords)

    def edge_lengths(self, positions: Optional[np.ndarray] = None) -> np.ndarray:
        p = self.vertices if positions is None else positions
        return np.linalg.norm(p[self.edges[:, 1]] - p[self.edges[:, 0]], axis=1)

    def face_areas(self, positions: Optional[np.ndarray] = None) -> np.ndarray:
        p = self.vertices if positions is None else positions
        a, b, c = (p[self.faces[:, k]] for k in range(3))
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)

    def vertex_areas(self) -> np.ndarray:
        """One third of the incident triangle area per vertex."""
        areas = np.zeros(self.vertex_count)
        share = self.face_areas() / 3.0
        for k in range(3):
            np.add.at(areas, self.faces[:, k], share)
        return areas

    def interior_edges(self) -> np.ndarray:
        """
        Edges shared by exactly two faces, as rows (i, j, k, l): the edge
        (i, j) and the opposite vertices k (first face) and l (second face).
        """
        incident: dict = {}
        for f, (a, b, c) in enumerate(self.faces):
            for u, v, w in ((a, b, c), (b, c, a), (c, a, b)):
                key = (min(u, v), max(u, v))
                incident.setdefault(key, []).append(w)
        rows = [(i, j, opp[0], opp[1]) for (i, j), opp in sorted(incident.items()) if len(opp) == 2]
        return np.asarray(rows, dtype=np.int64).reshape(-1, 4)


# ── OBJ IO ────────────────────────────────────────────────────


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_obj(path: PathLike, mesh: TriMesh) -> None:
    """Write ``v``, ``vt`` and ``f v/vt`` records (1-based indices)."""
    corners = mesh.uv_coords.reshape(-1, 2)
    table, inverse = np.unique(corners, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1, 3)
    lines: List[str] = []
    for x, y, z in mesh.vertices:
        lines.append(f"v {_fmt(x)} {_fmt(y)} {_fmt(z)}")
    for u, v in table:
        lines.append(f"vt {_fmt(u)} {_fmt(v)}")
    for face, uvf in zip(mesh.faces, inverse):
        lines.append("f " + " ".join(f"{vi + 1}/{ti + 1}" for vi, ti in zip(face, uvf)))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_obj(path: PathLike) -> TriMesh:
    """
    Read a triangulated OBJ with texture coordinates.

    Raises:
        FileFormatError: malformed records, non-triangle faces or faces
            without ``vt`` indices
    """
    vertices: List[List[float]] = []
    texcoords: List[List[float]] = []
    faces: List[List[int]] = []
    face_uv: List[List[int]] = []
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            parts = raw.split()
            if not parts or parts[0].startswith("#"):
                continue
            tag = parts[0]
            try:
                if tag == "v":
                    vertices.append([float(x) for x in parts[1:4]])
                elif tag == "vt":
                    texcoords.append([float(x) for x in parts[1:3]])
                elif tag == "f":
                    if len(parts) != 4:
                        raise FileFormatError(str(path), f"line {lineno}: only triangles are supported")
                    corner_v, corner_t = [], []
                    for token in parts[1:]:
                        fields = token.split("/")
                        if len(fields) < 2 or not fields[1]:
                            raise FileFormatError(str(path), f"line {lineno}: face corner without vt index")
                        corner_v.append(int(fields[0]) - 1)
                        corner_t.append(int(fields[1]) - 1)
                    faces.append(corner_v)
                    face_uv.append(corner_t)
            except ValueError:
                raise FileFormatError(str(path), f"line {lineno}: malformed '{tag}' record") from None
    tex = np.asarray(texcoords, dtype=np.float64).reshape(-1, 2)
    uv_index = np.asarray(face_uv, dtype=np.int64).reshape(-1, 3)
    if uv_index.size and (uv_index.min() < 0 or uv_index.max() >= len(tex)):
        raise FileFormatError(str(path), "vt index out of range")
    mesh = TriMesh(np.asarray(vertices).reshape(-1, 3), np.asarray(faces).reshape(-1, 3), tex[uv_index])
    logger.debug(f"Read {path}: {mesh.vertex_count} vertices, {mesh.face_count} faces")
    return mesh
