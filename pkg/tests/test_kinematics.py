# Area: Kinematics Tests
# PRD: docs/prd-bonecloth.md
"""Tests for 6D rotations, forward kinematics, pose files and the virtual-bone rig."""

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from bonecloth.errors import (
    AssetValidationError,
    DegenerateInputError,
    FileFormatError,
    NonFiniteError,
    ShapeMismatchError,
)
from bonecloth._assets.bodies import bar_body, swing_arm_body
from bonecloth._assets.garments import hanging_swatch
from bonecloth._diffcore import gradcheck, ops
from bonecloth._diffcore.tape import Tensor
from bonecloth._kinematics import (
    IDENTITY_6D,
    PoseSequence,
    PoseWindow,
    Skeleton,
    build_bone_rig,
    correct_weights,
    encode_6d,
    flat_to_matrix,
    matrix_to_flat,
    pose_skeleton,
    read_poses,
    rotation_6d_to_matrix,
    rotation_6d_to_matrix_tensor,
    skin_bones,
    skin_garment,
    skinning_transforms,
    weights_from_distances,
    write_poses,
)


def _yaw(angle: float) -> np.ndarray:
    return Rotation.from_euler("y", angle).as_matrix()


class TestRotation6d:
    """Gram-Schmidt decoding of the 6D encoding."""

    def test_roundtrip_through_encoding(self):
        rotations = Rotation.random(5, random_state=3).as_matrix()
        assert np.allclose(rotation_6d_to_matrix(encode_6d(rotations)), rotations, atol=1e-12)

    @pytest.mark.parametrize("seed", range(20))
    def test_random_roundtrip(self, seed):
        rng = np.random.default_rng(seed)
        r6 = rng.normal(size=(int(rng.integers(1, 16)), 6))
        rotations = rotation_6d_to_matrix(r6)
        assert np.allclose(rotation_6d_to_matrix(encode_6d(rotations)), rotations, atol=1e-12)
        assert np.allclose(encode_6d(rotations)[:, :3], r6[:, :3] / np.linalg.norm(r6[:, :3], axis=1, keepdims=True))

    def test_unnormalized_input_is_orthonormalized(self):
        r = rotation_6d_to_matrix(np.array([2.0, 0.0, 0.0, 1.0, 3.0, 0.0]))
        assert np.allclose(r, np.eye(3))

    def test_result_is_proper_rotation(self, rng):
        r = rotation_6d_to_matrix(rng.normal(size=(8, 6)))
        assert np.allclose(np.einsum("bji,bjk->bik", r, r), np.eye(3), atol=1e-12)
        assert np.allclose(np.linalg.det(r), 1.0)

    def test_flat_layout_is_column_major(self):
        r = np.arange(9.0).reshape(3, 3)
        flat = matrix_to_flat(r)
        assert flat[3] == r[0, 1]
        assert np.array_equal(flat_to_matrix(flat), r)

    def test_zero_first_column(self):
        with pytest.raises(DegenerateInputError) as exc:
            rotation_6d_to_matrix(np.array([[1, 0, 0, 0, 1, 0], [0, 0, 0, 0, 1, 0]], dtype=float))
        assert exc.value.details["index"] == 1

    def test_collinear_columns(self):
        with pytest.raises(DegenerateInputError):
            rotation_6d_to_matrix(np.array([1.0, 1.0, 0.0, 2.0, 2.0, 0.0]))

    def test_shape_checked(self):
        with pytest.raises(ShapeMismatchError):
            rotation_6d_to_matrix_tensor(Tensor(np.ones((2, 5))))

    def test_gradient(self, rng):
        r6 = rng.normal(size=(3, 6))
        weights = rng.uniform(0.5, 1.5, size=(3, 9))
        assert gradcheck(lambda t: ops.sum(ops.mul(rotation_6d_to_matrix_tensor(t), Tensor(weights))), [r6]) < 1e-3


class TestSkeleton:
    """Hierarchy validation and forward kinematics."""

    def test_parent_after_child_rejected(self):
        with pytest.raises(AssetValidationError):
            Skeleton(names=("a", "b"), parents=[1, -1], rest_rotations=np.tile(np.eye(3), (2, 1, 1)),
                     rest_translations=np.zeros((2, 3)))

    def test_second_root_rejected(self):
        with pytest.raises(AssetValidationError):
            Skeleton(names=("a", "b"), parents=[-1, -1], rest_rotations=np.tile(np.eye(3), (2, 1, 1)),
                     rest_translations=np.zeros((2, 3)))

    def test_identity_pose_gives_identity_transforms(self):
        skel = swing_arm_body().skeleton
        transforms = skinning_transforms(skel, skel.identity_pose())
        assert np.allclose(transforms, np.eye(4))

    def test_child_follows_parent(self):
        skel = swing_arm_body().skeleton
        pose = skel.identity_pose()
        pose[0] = encode_6d(_yaw(np.pi / 2))
        world = pose_skeleton(skel, pose)
        # shoulder sits 0.17 m along +x from the torso; a quarter turn about y sends +x to -z
        offset = world[1, :3, 3] - world[0, :3, 3]
        assert np.allclose(offset, [0.0, 0.3, -0.17], atol=1e-12)

    def test_pose_shape_checked(self):
        skel = bar_body(0.2).skeleton
        with pytest.raises(ShapeMismatchError):
            pose_skeleton(skel, np.zeros((2, 6)))


class TestPoseFiles:
    """BPOS write/read and sliding windows."""

    def test_write_then_read(self, tmp_path, rng):
        seq = PoseSequence(frames=rng.normal(size=(4, 3, 6)), dt=1 / 30)
        path = tmp_path / "walk.bpos"
        write_poses(path, seq)
        loaded = read_poses(path, joint_count=3)
        assert np.array_equal(loaded.frames, seq.frames)
        assert loaded.dt == seq.dt

    def test_joint_count_mismatch(self, tmp_path):
        path = tmp_path / "p.bpos"
        write_poses(path, PoseSequence(frames=np.zeros((2, 3, 6)), dt=0.1))
        with pytest.raises(FileFormatError):
            read_poses(path, joint_count=4)

    def test_truncated_file(self, tmp_path):
        path = tmp_path / "p.bpos"
        write_poses(path, PoseSequence(frames=np.zeros((2, 3, 6)), dt=0.1))
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(FileFormatError):
            read_poses(path)

    def test_window_clamps_at_start(self):
        frames = np.arange(5, dtype=float)[:, None, None] * np.ones((5, 1, 6))
        seq = PoseSequence(frames=frames, dt=0.1)
        assert seq.window(0)[:, 0, 0].tolist() == [0.0, 0.0, 0.0]
        assert seq.window(1)[:, 0, 0].tolist() == [0.0, 0.0, 1.0]
        assert seq.window(4)[:, 0, 0].tolist() == [2.0, 3.0, 4.0]

    def test_window_shape_checked(self):
        with pytest.raises(ShapeMismatchError):
            PoseWindow(frames=np.zeros((2, 1, 6)), dt=0.1)

    def test_nonpositive_dt(self):
        with pytest.raises(AssetValidationError):
            PoseSequence(frames=np.zeros((1, 1, 6)), dt=0.0)


class TestBoneRig:
    """Bone sampling, initial weights and the two skinning stages."""

    @pytest.fixture(scope="class")
    def rig(self):
        garment, _ = hanging_swatch(5, 5, 0.3)
        return build_bone_rig(garment, bar_body(0.2), bone_count=6)

    def test_shapes_and_normalization(self, rig):
        assert rig.bone_count == 6 and rig.vertex_count == 25
        assert len(set(rig.bone_vertices.tolist())) == 6
        assert np.allclose(rig.init_weights.sum(axis=1), 1.0)
        assert np.allclose(rig.smpl_weights.sum(axis=1), 1.0)
        assert rig.sigma > 0

    def test_first_bone_is_lowest_vertex(self, rig):
        assert rig.canonical[rig.bone_vertices[0], 1] == rig.canonical[:, 1].min()

    def test_bone_vertex_prefers_own_bone(self, rig):
        rows = rig.init_weights[rig.bone_vertices]
        assert np.array_equal(np.argmax(rows, axis=1), np.arange(6))

    def test_identity_pose_reproduces_canonical(self, rig):
        transforms = np.tile(np.eye(4), (1, 1, 1))
        assert np.allclose(skin_garment(rig, rig.init_weights, transforms), rig.canonical, atol=1e-12)

    def test_rigid_root_motion(self, rig):
        skel = bar_body(0.2).skeleton
        transforms = skinning_transforms(skel, encode_6d(_yaw(0.4))[None])
        expected = rig.canonical @ transforms[0, :3, :3].T + transforms[0, :3, 3]
        assert np.allclose(skin_garment(rig, rig.init_weights, transforms), expected, atol=1e-10)
        assert np.allclose(skin_bones(rig, transforms), expected[rig.bone_vertices], atol=1e-10)

    @pytest.mark.parametrize("seed", range(100))
    def test_rigid_equivariance(self, rig, seed):
        rng = np.random.default_rng(seed)
        joints = rig.smpl_weights.shape[1]
        transforms = np.tile(np.eye(4), (joints, 1, 1))
        transforms[:, :3, :3] = Rotation.random(joints, random_state=seed).as_matrix()
        transforms[:, :3, 3] = rng.normal(scale=0.2, size=(joints, 3))
        rigid = np.eye(4)
        rigid[:3, :3] = Rotation.random(random_state=1000 + seed).as_matrix()
        rigid[:3, 3] = rng.normal(size=3)
        before = skin_garment(rig, rig.init_weights, transforms)
        after = skin_garment(rig, rig.init_weights, rigid @ transforms)
        assert np.allclose(after, before @ rigid[:3, :3].T + rigid[:3, 3], atol=1e-6)

    def test_translation_correction_shifts_garment(self, rig):
        corrections = np.zeros((6, 9))
        corrections[:, 6:] = [0.0, 0.0, 0.05]
        posed = skin_garment(rig, rig.init_weights, np.eye(4)[None], corrections)
        assert np.allclose(posed - rig.canonical, [0.0, 0.0, 0.05], atol=1e-12)

    def test_skin_bones_shape_checked(self, rig):
        with pytest.raises(ShapeMismatchError):
            skin_bones(rig, np.tile(np.eye(4), (2, 1, 1)))


class TestWeights:
    """Geodesic softmax and corrected weights."""

    def test_unreachable_rows_become_uniform(self):
        distances = np.array([[0.0, 1.0], [np.inf, np.inf]])
        weights, uniform = weights_from_distances(distances, 0.5)
        assert uniform.tolist() == [1]
        assert np.allclose(weights[1], [0.5, 0.5])
        assert weights[0, 0] > weights[0, 1]

    def test_nonpositive_sigma(self):
        with pytest.raises(DegenerateInputError):
            weights_from_distances(np.zeros((1, 2)), 0.0)

    def test_zero_delta_is_softmax_of_init(self):
        init = np.array([[0.7, 0.3], [0.2, 0.8]])
        expected = np.exp(init) / np.exp(init).sum(axis=1, keepdims=True)
        assert np.allclose(correct_weights(init, np.zeros((2, 2))), expected)

    @pytest.mark.parametrize("seed", range(10))
    def test_corrected_rows_sum_to_one(self, seed):
        rng = np.random.default_rng(seed)
        init = rng.dirichlet(np.ones(6), size=25)
        weights = correct_weights(init, rng.normal(scale=3.0, size=init.shape))
        assert np.allclose(weights.sum(axis=1), 1.0, atol=1e-6)
        assert (weights >= 0).all()

    def test_non_finite_delta(self):
        delta = np.zeros((2, 2))
        delta[1, 0] = np.nan
        with pytest.raises(NonFiniteError) as exc:
            correct_weights(np.ones((2, 2)) / 2, delta)
        assert exc.value.details["index"] == 1

    def test_delta_shape_checked(self):
        with pytest.raises(ShapeMismatchError):
            correct_weights(np.ones((2, 2)), np.zeros((2, 3)))


def test_identity_constant_is_unit_columns():
    assert np.allclose(rotation_6d_to_matrix(IDENTITY_6D), np.eye(3))
