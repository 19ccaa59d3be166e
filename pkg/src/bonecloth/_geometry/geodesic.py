# Area: Geometry
# PRD: docs/prd-bonecloth.md
"""
bonecloth._geometry.geodesic — Edge-graph geodesics and farthest-point sampling
===============================================================================

Geodesic distance here is the shortest path length over mesh edges with
Euclidean edge weights (Dijkstra), not an exact polyhedral geodesic.
"""

from __future__ import annotations

import logging
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from ..errors import DegenerateInputError
from .mesh import TriMesh

logger = logging.getLogger("bonecloth.geometry")


def edge_graph(mesh: TriMesh, positions: Optional[np.ndarray] = None) -> sp.csr_matrix:
    """Symmetric sparse adjacency weighted by edge length."""
    n = mesh.vertex_count
    lengths = mesh.edge_lengths(positions)
    # explicit zeros are dropped by csgraph; keep coincident vertices connected
    lengths = np.maximum(lengths, np.finfo(np.float64).tiny)
    i, j = mesh.edges[:, 0], mesh.edges[:, 1]
    graph = sp.coo_matrix(
        (np.concatenate([lengths, lengths]), (np.concatenate([i, j]), np.concatenate([j, i]))),
        shape=(n, n),
    )
    return graph.tocsr()


def geodesic_distances(
    mesh: TriMesh,
    sources: Sequence[int],
    positions: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Distance from every vertex to the nearest source along mesh edges.

    Unreachable vertices get +inf and a warning.

    Raises:
        DegenerateInputError: empty source set or out-of-range index
    """
    sources = np.asarray(sources, dtype=np.int64).reshape(-1)
    if sources.size == 0:
        raise DegenerateInputError("geodesic_distances", "empty source set")
    bad = np.flatnonzero((sources < 0) | (sources >= mesh.vertex_count))
    if bad.size:
        raise DegenerateInputError("geodesic_distances", "source index out of range", index=int(sources[bad[0]]))
    dist = dijkstra(edge_graph(mesh, positions), directed=False, indices=sources, min_only=True)
    unreachable = int(np.count_nonzero(np.isinf(dist)))
    if unreachable:
        logger.warning(f"{unreachable} vertices unreachable from the geodesic sources")
    return dist


def geodesic_matrix(
    mesh: TriMesh,
    sources: Sequence[int],
    positions: Optional[np.ndarray] = None,
) -> np.ndarray:
    """(V, len(sources)) distances, one column per source vertex."""
    sources = np.asarray(sources, dtype=np.int64).reshape(-1)
    if sources.size == 0:
        raise DegenerateInputError("geodesic_matrix", "empty source set")
    dist = dijkstra(edge_graph(mesh, positions), directed=False, indices=sources)
    return np.ascontiguousarray(dist.T)


def farthest_point_sample(points: np.ndarray, count: int, seed_index: int = 0) -> np.ndarray:
    """
    Greedy max-min selection of *count* indices starting at *seed_index*.

    Each step picks the point whose distance to the selected set is
    largest; ``np.argmax`` returns the first maximum, so ties go to the
    lowest index.

    Raises:
        DegenerateInputError: count outside [1, len(points)] or bad seed
    """
    points = np.asarray(points, dtype=np.float64)
    n = len(points)
    if not 1 <= count <= n:
        raise DegenerateInputError("farthest_point_sample", f"count {count} not in [1, {n}]")
    if not 0 <= seed_index < n:
        raise DegenerateInputError("farthest_point_sample", "seed index out of range", index=seed_index)
    selected = np.empty(count, dtype=np.int64)
    selected[0] = seed_index
    min_dist = np.linalg.norm(points - points[seed_index], axis=1)
    min_dist[seed_index] = -np.inf
    for step in range(1, count):
        pick = int(np.argmax(min_dist))
        selected[step] = pick
        np.minimum(min_dist, np.linalg.norm(points - points[pick], axis=1), out=min_dist)
        min_dist[selected[: step + 1]] = -np.inf
    return selected
