# Area: Geometry Tests
# PRD: docs/prd-bonecloth.md
"""Tests for meshes, OBJ IO, geodesics, the Laplacian, capsule SDFs and the UV texel map."""

import logging

import numpy as np
import pytest

from bonecloth.errors import AssetValidationError, DegenerateInputError, FileFormatError, ShapeMismatchError
from bonecloth._assets.garments import grid_swatch, tube
from bonecloth._diffcore import gradcheck, ops
from bonecloth._geometry.geodesic import farthest_point_sample, geodesic_distances, geodesic_matrix
from bonecloth._geometry.laplacian import laplacian_matrix, laplacian_residual
from bonecloth._geometry.mesh import TriMesh, read_obj, unique_edges, write_obj
from bonecloth._geometry.sdf import BodySdf, signed_distance, signed_distance_tensor
from bonecloth._geometry.uv import UvGrid, build_texel_map, rasterize_to_uv, sample_from_uv


def _quad() -> TriMesh:
    vertices = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]])
    faces = np.array([[0, 1, 2], [1, 3, 2]])
    uv = vertices[:, :2][faces]
    return TriMesh(vertices, faces, uv)


def _bellman_ford(mesh: TriMesh, sources) -> np.ndarray:
    dist = np.full(mesh.vertex_count, np.inf)
    dist[sources] = 0.0
    i, j = mesh.edges[:, 0], mesh.edges[:, 1]
    length = np.linalg.norm(mesh.vertices[i] - mesh.vertices[j], axis=1)
    for _ in range(mesh.vertex_count - 1):
        before = dist.copy()
        np.minimum.at(dist, j, before[i] + length)
        np.minimum.at(dist, i, before[j] + length)
        if np.array_equal(dist, before):
            break
    return dist


def _vertex_uv(mesh: TriMesh) -> np.ndarray:
    uv = np.zeros((mesh.vertex_count, 2))
    uv[mesh.faces.reshape(-1)] = mesh.uv_coords.reshape(-1, 2)
    return uv


class TestTriMesh:
    """Construction, validation and derived quantities."""

    def test_unique_edges(self):
        edges = unique_edges(np.array([[0, 1, 2], [1, 3, 2]]))
        assert edges.tolist() == [[0, 1], [0, 2], [1, 2], [1, 3], [2, 3]]

    def test_face_index_out_of_range(self):
        with pytest.raises(AssetValidationError):
            TriMesh(np.zeros((3, 3)), np.array([[0, 1, 3]]), np.zeros((1, 3, 2)))

    def test_uv_shape_checked(self):
        with pytest.raises(AssetValidationError):
            TriMesh(np.eye(3), np.array([[0, 1, 2]]), np.zeros((2, 3, 2)))

    def test_areas_and_lengths(self):
        mesh = _quad()
        assert np.allclose(mesh.face_areas(), [0.5, 0.5])
        assert np.isclose(mesh.vertex_areas().sum(), 1.0)
        assert np.isclose(mesh.edge_lengths().max(), np.sqrt(2.0))

    def test_interior_edges(self):
        stencils = _quad().interior_edges()
        assert stencils.tolist() == [[1, 2, 0, 3]]

    def test_with_vertices_keeps_topology(self):
        mesh = _quad()
        moved = mesh.with_vertices(mesh.vertices * 2.0)
        assert np.array_equal(moved.faces, mesh.faces)
        assert np.allclose(moved.face_areas(), [2.0, 2.0])


class TestObjIO:
    """OBJ files with texture coordinates."""

    def test_write_then_read(self, tmp_path):
        mesh = grid_swatch(3, 4, 0.3, 0.2, (0.1, 1.0, 0.0))
        path = tmp_path / "swatch.obj"
        write_obj(path, mesh)
        loaded = read_obj(path)
        assert np.array_equal(loaded.vertices, mesh.vertices)
        assert np.array_equal(loaded.faces, mesh.faces)
        assert np.allclose(loaded.uv_coords, mesh.uv_coords)

    def test_quad_face_rejected(self, tmp_path):
        path = tmp_path / "quad.obj"
        path.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvt 0 0\nf 1/1 2/1 3/1 4/1\n")
        with pytest.raises(FileFormatError):
            read_obj(path)

    def test_face_without_texture_rejected(self, tmp_path):
        path = tmp_path / "plain.obj"
        path.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nf 1 2 3\n")
        with pytest.raises(FileFormatError):
            read_obj(path)

    def test_malformed_vertex(self, tmp_path):
        path = tmp_path / "bad.obj"
        path.write_text("v 0 zero 0\n")
        with pytest.raises(FileFormatError):
            read_obj(path)


class TestGeodesic:
    """Edge-graph shortest paths and farthest point sampling."""

    def test_distances_along_grid(self):
        mesh = grid_swatch(2, 5, 0.4, 0.1, (0.0, 0.0, 0.0))
        dist = geodesic_distances(mesh, [0])
        # top row: vertices 0..4 spaced 0.1 apart
        assert np.allclose(dist[:5], [0.0, 0.1, 0.2, 0.3, 0.4])

    def test_matrix_columns(self):
        mesh = grid_swatch(3, 3, 1.0, 1.0, (0.0, 0.0, 0.0))
        matrix = geodesic_matrix(mesh, [0, 8])
        assert matrix.shape == (9, 2)
        assert matrix[0, 0] == 0.0 and matrix[8, 1] == 0.0
        assert np.allclose(matrix[:, 0], geodesic_distances(mesh, [0]))

    def test_unreachable_vertices(self, caplog):
        mesh = _quad()
        vertices = np.vstack([mesh.vertices, [[5.0, 5.0, 5.0], [6.0, 5.0, 5.0], [5.0, 6.0, 5.0]]])
        faces = np.vstack([mesh.faces, [[4, 5, 6]]])
        two = TriMesh(vertices, faces, np.zeros((3, 3, 2)))
        with caplog.at_level(logging.WARNING, logger="bonecloth"):
            dist = geodesic_distances(two, [0])
        assert np.isinf(dist[4:]).all()
        assert "unreachable" in caplog.text

    def test_empty_sources(self):
        with pytest.raises(DegenerateInputError):
            geodesic_distances(_quad(), [])

    def test_source_out_of_range(self):
        with pytest.raises(DegenerateInputError):
            geodesic_distances(_quad(), [4])

    def test_farthest_point_sample(self):
        points = np.array([[0.0, 0, 0], [1.0, 0, 0], [2.0, 0, 0], [3.0, 0, 0], [10.0, 0, 0]])
        assert farthest_point_sample(points, 3, 0).tolist() == [0, 4, 3]

    def test_farthest_point_ties_take_lowest_index(self):
        points = np.array([[0.0, 0, 0], [1.0, 0, 0], [-1.0, 0, 0]])
        assert farthest_point_sample(points, 2, 0).tolist() == [0, 1]

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_bellman_ford(self, seed):
        rng = np.random.default_rng(seed)
        rows, cols = rng.integers(3, 15, size=2)
        mesh = grid_swatch(int(rows), int(cols), 1.0, 1.0, (0.0, 0.0, 0.0))
        mesh = mesh.with_vertices(mesh.vertices + rng.normal(scale=0.02, size=mesh.vertices.shape))
        sources = rng.choice(mesh.vertex_count, size=int(rng.integers(1, 4)), replace=False)
        assert np.allclose(geodesic_distances(mesh, sources), _bellman_ford(mesh, sources), atol=1e-9)

    @pytest.mark.parametrize("seed", range(10))
    def test_farthest_point_is_max_min_at_every_step(self, seed):
        rng = np.random.default_rng(seed)
        points = rng.uniform(-1.0, 1.0, size=(int(rng.integers(5, 51)), 3))
        count = int(rng.integers(2, len(points) + 1))
        selected = farthest_point_sample(points, count, int(rng.integers(len(points))))
        assert len(set(selected.tolist())) == count
        pairwise = np.linalg.norm(points[:, None] - points[None], axis=-1)
        for k in range(1, count):
            gap = pairwise[:, selected[:k]].min(axis=1)
            assert gap[selected[k]] == pytest.approx(gap.max())

    @pytest.mark.parametrize("count", [0, 6])
    def test_farthest_point_bad_count(self, count):
        with pytest.raises(DegenerateInputError):
            farthest_point_sample(np.zeros((5, 3)), count)


class TestLaplacian:
    """Uniform Laplacian residuals."""

    def test_flat_grid_interior_is_zero(self):
        mesh = grid_swatch(4, 4, 0.3, 0.3, (0.0, 0.0, 0.0))
        residual = laplacian_residual(mesh, mesh.vertices)
        interior = [5, 6, 9, 10]
        assert np.allclose(residual[interior], 0.0)
        assert not np.allclose(residual[0], 0.0)

    def test_translation_invariant(self):
        mesh = grid_swatch(3, 3, 1.0, 1.0, (0.0, 0.0, 0.0))
        L = laplacian_matrix(mesh)
        assert np.allclose(L @ np.ones(mesh.vertex_count), 0.0)

    def test_isolated_vertex_row_is_zero(self, caplog):
        mesh = _quad()
        lonely = TriMesh(np.vstack([mesh.vertices, [[3.0, 3.0, 3.0]]]), mesh.faces, mesh.uv_coords)
        with caplog.at_level(logging.WARNING, logger="bonecloth"):
            L = laplacian_matrix(lonely)
        assert np.allclose(L.getrow(4).toarray(), 0.0)
        assert "isolated" in caplog.text

    def test_shape_checked(self):
        with pytest.raises(ShapeMismatchError):
            laplacian_residual(_quad(), np.zeros((3, 3)))


class TestSdf:
    """Capsule-union signed distance."""

    @pytest.fixture
    def capsule(self):
        return BodySdf(starts=[[0.0, 0.0, 0.0]], ends=[[1.0, 0.0, 0.0]], radii=[0.5])

    def test_values(self, capsule):
        points = np.array([[0.5, 1.0, 0.0], [0.5, 0.0, 0.0], [2.0, 0.0, 0.0], [-0.5, 0.0, 0.0]])
        assert np.allclose(signed_distance(capsule, points), [0.5, -0.5, 0.5, 0.0])

    def test_union_takes_minimum(self):
        sdf = BodySdf(starts=[[0, 0, 0], [0, 3, 0]], ends=[[1, 0, 0], [1, 3, 0]], radii=[0.5, 0.25])
        assert np.allclose(signed_distance(sdf, [[0.5, 2.0, 0.0]]), [0.75])

    def test_gradient_is_outward_unit(self, capsule):
        grad = capsule.gradient(np.array([[0.5, 2.0, 0.0], [3.0, 0.0, 0.0]]))
        assert np.allclose(grad, [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])

    def test_nonpositive_radius(self):
        with pytest.raises(DegenerateInputError):
            BodySdf(starts=[[0, 0, 0]], ends=[[1, 0, 0]], radii=[0.0])

    def test_empty_union(self):
        with pytest.raises(DegenerateInputError):
            BodySdf(starts=np.zeros((0, 3)), ends=np.zeros((0, 3)), radii=np.zeros(0))

    def test_tensor_gradient(self, capsule):
        points = np.array([[0.3, 0.9, 0.2], [1.4, -0.3, 0.1], [0.6, 0.1, -0.7]])
        assert gradcheck(lambda p: ops.sum(signed_distance_tensor(capsule, p)), [points]) < 1e-3


class TestTexelMap:
    """Rasterization and bilinear readback on the UV atlas."""

    def test_square_atlas_fully_occupied(self):
        mesh = grid_swatch(4, 4, 0.3, 0.3, (0.0, 0.0, 0.0))
        texmap = build_texel_map(mesh, 6, 6)
        assert texmap.occupancy.all()
        assert np.allclose(np.asarray(texmap.raster.sum(axis=1)).reshape(-1), 1.0)

    def test_rasterize_linear_field_is_exact(self):
        mesh = grid_swatch(4, 5, 0.3, 0.3, (0.0, 0.0, 0.0))
        height, width = 6, 8
        texmap = build_texel_map(mesh, height, width)
        grid = rasterize_to_uv(texmap, _vertex_uv(mesh))
        i, j = np.meshgrid(np.arange(height), np.arange(width), indexing="ij")
        expected = np.stack([(j + 0.5) / width, (i + 0.5) / height], axis=-1)
        assert np.allclose(grid.data, expected)

    def test_sample_constant_field(self):
        mesh = grid_swatch(4, 4, 0.3, 0.3, (0.0, 0.0, 0.0))
        texmap = build_texel_map(mesh, 5, 5)
        grid = UvGrid(data=np.full((5, 5, 2), 3.0), occupancy=texmap.occupancy)
        assert np.allclose(sample_from_uv(texmap, grid), 3.0)

    def test_seam_vertices_average(self):
        mesh = tube(3, 6, 1.0, 0.5, 0.2, 0.3)
        texmap = build_texel_map(mesh, 8, 8)
        rows = np.asarray(texmap.sample.sum(axis=1)).reshape(-1)
        assert np.allclose(rows, 1.0)

    def test_partial_atlas_rows_normalized(self):
        mesh = _quad()
        small = TriMesh(mesh.vertices, mesh.faces, mesh.uv_coords * 0.5)
        texmap = build_texel_map(small, 8, 8)
        assert not texmap.occupancy.all()
        assert np.allclose(np.asarray(texmap.sample.sum(axis=1)).reshape(-1), 1.0)

    def test_empty_grid_rejected(self):
        with pytest.raises(DegenerateInputError):
            build_texel_map(_quad(), 0, 4)

    def test_rasterize_shape_checked(self):
        texmap = build_texel_map(_quad(), 4, 4)
        with pytest.raises(ShapeMismatchError):
            rasterize_to_uv(texmap, np.zeros((3, 2)))
