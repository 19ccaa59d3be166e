# Area: Geometry
# PRD: docs/prd-bonecloth.md
"""Meshes, UV atlas operators, geodesics, Laplacian and the body SDF."""

from .mesh import TriMesh, read_obj, write_obj, unique_edges
from .geodesic import geodesic_distances, geodesic_matrix, farthest_point_sample, edge_graph
from .laplacian import laplacian_matrix, laplacian_residual
from .uv import UvGrid, TexelMap, build_texel_map, rasterize_to_uv, sample_from_uv
from .sdf import BodySdf, signed_distance, signed_distance_tensor

__all__ = [
    "TriMesh",
    "read_obj",
    "write_obj",
    "unique_edges",
    "geodesic_distances",
    "geodesic_matrix",
    "farthest_point_sample",
    "edge_graph",
    "laplacian_matrix",
    "laplacian_residual",
    "UvGrid",
    "TexelMap",
    "build_texel_map",
    "rasterize_to_uv",
    "sample_from_uv",
    "BodySdf",
    "signed_distance",
    "signed_distance_tensor",
]
