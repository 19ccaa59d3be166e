# Area: Physics Tests
# PRD: docs/prd-bonecloth.md
"""Tests for the symplectic Euler step, garment constants and the loss terms."""

import numpy as np
import pytest

from bonecloth.errors import ConfigValidationError, DegenerateInputError, NonFiniteError, ShapeMismatchError
from bonecloth._assets.garments import grid_swatch
from bonecloth._diffcore import gradcheck
from bonecloth._diffcore.tape import Tape, Tensor
from bonecloth._geometry.mesh import TriMesh
from bonecloth._geometry.sdf import BodySdf
from bonecloth._physics import (
    SimState,
    dihedral_angles,
    garment_constants,
    gravity_offsets,
    integrate,
    integrate_tensor,
    loss_bend,
    loss_collision,
    loss_friction,
    loss_inertia,
    loss_interp,
    loss_laplacian,
    loss_mse,
    loss_stretch,
    vertex_masses,
    weighted_total,
)

QUAD = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]])
# vertex 3 rotated a quarter turn about the shared diagonal
FOLDED = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.5, 0.5, np.sqrt(0.5)]])
STENCIL = np.array([[1, 2, 0, 3]])


@pytest.fixture
def capsule():
    return BodySdf(starts=[[0.0, 0.0, 0.0]], ends=[[1.0, 0.0, 0.0]], radii=[0.5])


def _value(t: Tensor) -> float:
    return float(t.data)


class TestIntegrator:
    """v += Δt a, then p += Δt v."""

    def test_two_steps_under_constant_acceleration(self):
        state = SimState.at_rest(np.zeros((1, 3)))
        accel = np.array([[0.0, -10.0, 0.0]])
        state = integrate(state, accel, 0.1)
        assert np.allclose(state.velocities, [[0.0, -1.0, 0.0]])
        assert np.allclose(state.positions, [[0.0, -0.1, 0.0]])
        state = integrate(state, accel, 0.1)
        assert np.allclose(state.positions, [[0.0, -0.3, 0.0]])
        assert np.allclose(state.previous, [[0.0, -0.1, 0.0]])
        assert np.allclose(state.previous2, [[0.0, 0.0, 0.0]])

    def test_non_finite_acceleration_names_vertex(self):
        accel = np.zeros((3, 3))
        accel[2, 1] = np.inf
        with pytest.raises(NonFiniteError) as exc:
            integrate(SimState.at_rest(np.zeros((3, 3))), accel, 0.1)
        assert exc.value.index == 2

    def test_acceleration_shape_checked(self):
        with pytest.raises(ShapeMismatchError):
            integrate(SimState.at_rest(np.zeros((3, 3))), np.zeros((2, 3)), 0.1)

    @pytest.mark.parametrize("dt", [0.0, -0.1])
    def test_nonpositive_dt(self, dt):
        with pytest.raises(ConfigValidationError) as exc:
            integrate(SimState.at_rest(np.zeros((1, 3))), np.zeros((1, 3)), dt)
        assert exc.value.exit_kind == "validation"
        assert exc.value.details["dt"] == dt

    def test_tensor_step_nonpositive_dt(self):
        with pytest.raises(ConfigValidationError):
            integrate_tensor(Tensor(np.ones((2, 3))), Tensor(np.zeros((2, 3))), Tensor(np.zeros((2, 3))), 0.0)

    def test_tensor_step_matches(self):
        p, v = Tensor(np.ones((2, 3))), Tensor(np.zeros((2, 3)))
        positions, velocities = integrate_tensor(p, v, Tensor(np.full((2, 3), 2.0)), 0.5)
        assert np.allclose(velocities.data, 1.0)
        assert np.allclose(positions.data, 1.5)


class TestGarmentConstants:
    """Rest lengths, stencils, masses."""

    def test_quad(self):
        mesh = TriMesh(QUAD, [[0, 1, 2], [1, 3, 2]], QUAD[:, :2][[[0, 1, 2], [1, 3, 2]]])
        constants = garment_constants(mesh, density=0.3, pinned=[0])
        assert constants.bend_stencils.tolist() == STENCIL.tolist()
        assert np.allclose(constants.rest_angles, 0.0)
        assert np.isclose(constants.masses.sum(), 0.3)
        assert constants.pinned.tolist() == [0]

    def test_zero_length_edge(self):
        vertices = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        mesh = TriMesh(vertices, [[0, 1, 2]], np.zeros((1, 3, 2)))
        with pytest.raises(DegenerateInputError):
            garment_constants(mesh, density=0.2)

    def test_vertex_masses_follow_area(self):
        mesh = grid_swatch(3, 3, 1.0, 1.0, (0.0, 0.0, 0.0))
        masses = vertex_masses(mesh, 2.0)
        assert np.isclose(masses.sum(), 2.0)
        assert masses[4] > masses[0]

    def test_quarter_fold_angle(self):
        assert np.isclose(abs(dihedral_angles(FOLDED, STENCIL)[0]), np.pi / 2)


class TestLossValues:
    """Closed-form values of each term."""

    def test_stretch(self):
        positions = Tensor(np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]]))
        loss = loss_stretch(positions, np.array([[0, 1]]), np.array([1.0]), k_s=4.0)
        assert _value(loss) == pytest.approx(2.0)

    def test_stretch_sum_reduction(self):
        positions = Tensor(np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [2.0, 3.0, 0.0]]))
        edges = np.array([[0, 1], [1, 2]])
        loss = loss_stretch(positions, edges, np.array([1.0, 1.0]), k_s=1.0, reduction="sum")
        assert _value(loss) == pytest.approx(0.5 * (1.0 + 4.0))

    def test_bend_quarter_fold(self):
        loss = loss_bend(Tensor(FOLDED), STENCIL, np.zeros(1), k_b=2.0)
        assert _value(loss) == pytest.approx(np.pi ** 2 / 4, rel=1e-5)

    def test_bend_flat_is_zero(self):
        assert _value(loss_bend(Tensor(QUAD), STENCIL, np.zeros(1), k_b=2.0)) == pytest.approx(0.0, abs=1e-7)

    def test_bend_without_stencils(self):
        assert _value(loss_bend(Tensor(QUAD), np.zeros((0, 4), dtype=np.int64), np.zeros(0), k_b=1.0)) == 0.0

    def test_collision_penetration_only(self, capsule):
        positions = Tensor(np.array([[0.5, 0.45, 0.0], [0.5, 2.0, 0.0]]))
        loss = loss_collision(positions, capsule, k_c=3.0, margin=0.0)
        assert _value(loss) == pytest.approx(0.05 ** 3 / 2, rel=1e-4)

    def test_collision_outside_margin_is_zero(self, capsule):
        positions = Tensor(np.array([[0.5, 0.6, 0.0]]))
        assert _value(loss_collision(positions, capsule, k_c=1.0, margin=0.05)) == 0.0

    def test_inertia_with_gravity(self):
        zeros = Tensor(np.zeros((2, 3)))
        step = gravity_offsets(np.array([0.0, -10.0, 0.0]), 0.1, 2)
        assert _value(loss_inertia(zeros, zeros, zeros, step)) == pytest.approx(0.01)

    def test_inertia_constant_velocity_is_zero(self):
        p2 = Tensor(np.zeros((1, 3)))
        p1 = Tensor(np.ones((1, 3)))
        p = Tensor(np.full((1, 3), 2.0))
        assert _value(loss_inertia(p, p1, p2)) == 0.0

    def test_inertia_stationary_body_moving_cloth(self):
        # cloth that moved last frame and stops now deviates from the inertial path
        p2 = Tensor(np.zeros((1, 3)))
        p1 = Tensor(np.ones((1, 3)))
        assert _value(loss_inertia(p1, p1, p2)) > 0.0

    def test_gravity_skips_supported_vertices(self):
        step = gravity_offsets(np.array([0.0, -9.81, 0.0]), 0.1, 3, supported=[True, False, False])
        assert np.allclose(step[0], 0.0)
        assert np.allclose(step[1:], [0.0, -0.0981, 0.0])

    def test_inertia_shape_checked(self):
        with pytest.raises(ShapeMismatchError):
            loss_inertia(Tensor(np.zeros((2, 3))), Tensor(np.zeros((2, 3))), Tensor(np.zeros((3, 3))))

    def test_friction_tangential_slip(self, capsule):
        previous = Tensor(np.array([[0.5, 0.5, 0.0], [5.0, 5.0, 5.0]]))
        positions = Tensor(np.array([[0.6, 0.52, 0.0], [5.0, 4.0, 5.0]]))
        loss = loss_friction(positions, previous, capsule, mu=0.5, margin=0.01)
        # the far vertex is out of contact and does not dilute the mean
        assert _value(loss) == pytest.approx(0.5 * 0.1, rel=1e-5)

    def test_friction_is_mean_over_contact_vertices(self, capsule):
        previous = Tensor(np.array([[0.5, 0.5, 0.0], [0.2, 0.5, 0.0], [5.0, 5.0, 5.0]]))
        positions = Tensor(np.array([[0.51, 0.5, 0.0], [0.2, 0.5, 0.0], [5.0, 5.0, 5.0]]))
        loss = loss_friction(positions, previous, capsule, mu=0.5, margin=0.01)
        assert _value(loss) == pytest.approx(0.5 * 0.01 / 2, rel=1e-5)

    def test_friction_without_contact(self, capsule):
        previous = Tensor(np.array([[5.0, 5.0, 5.0]]))
        assert _value(loss_friction(previous, previous, capsule, mu=1.0, margin=0.01)) == 0.0

    def test_mse(self):
        a = Tensor(np.zeros((2, 3)))
        b = Tensor(np.array([[1.0, 0.0, 0.0], [0.0, 2.0, 0.0]]))
        assert _value(loss_mse(a, b)) == pytest.approx(2.5)

    def test_mse_shape_checked(self):
        with pytest.raises(ShapeMismatchError):
            loss_mse(Tensor(np.zeros((2, 3))), Tensor(np.zeros((3, 3))))

    def test_laplacian_matches_residual(self):
        mesh = grid_swatch(3, 3, 1.0, 1.0, (0.0, 0.0, 0.0))
        constants = garment_constants(mesh, density=0.2)
        residual = constants.laplacian @ mesh.vertices
        expected = np.mean(np.sum(residual ** 2, axis=1))
        assert _value(loss_laplacian(Tensor(mesh.vertices), constants.laplacian)) == pytest.approx(expected, rel=1e-5)

    def test_interp(self, capsule):
        positions = Tensor(np.array([[0.5, 0.45, 0.0], [0.5, 2.0, 0.0]]))
        assert _value(loss_interp(positions, capsule, epsilon=0.01)) == pytest.approx(0.06 ** 2 / 2, rel=1e-4)

    def test_weighted_total(self):
        terms = {"stretch": Tensor(np.array(2.0)), "bend": Tensor(np.array(3.0))}
        assert _value(weighted_total(terms, {"stretch": 0.5, "bend": 0.0})) == pytest.approx(1.0)
        assert _value(weighted_total({}, {"stretch": 1.0})) == 0.0


class TestLossGradients:
    """Every term differentiates correctly through the tape."""

    def test_stretch(self, rng):
        positions = rng.normal(size=(4, 3))
        edges = np.array([[0, 1], [1, 2], [2, 3], [0, 3]])
        assert gradcheck(lambda p: loss_stretch(p, edges, np.full(4, 0.5), k_s=10.0), [positions]) < 1e-3

    def test_bend(self, rng):
        positions = FOLDED + rng.normal(scale=0.05, size=FOLDED.shape)
        assert gradcheck(lambda p: loss_bend(p, STENCIL, np.array([0.3]), k_b=1.0), [positions]) < 1e-3

    def test_collision(self, capsule):
        positions = np.array([[0.5, 0.4, 0.1], [0.2, -0.3, 0.35], [0.8, 0.1, -0.45]])
        assert gradcheck(lambda p: loss_collision(p, capsule, k_c=5.0, margin=0.1), [positions]) < 1e-3

    def test_inertia(self, rng):
        prev, prev2 = rng.normal(size=(3, 3)), rng.normal(size=(3, 3))
        step = gravity_offsets(np.array([0.0, -9.81, 0.0]), 0.05, 3)
        assert gradcheck(
            lambda p, a, b: loss_inertia(p, a, b, step), [rng.normal(size=(3, 3)), prev, prev2]
        ) < 1e-3

    def test_friction(self, capsule):
        previous = np.array([[0.5, 0.5, 0.0], [0.3, 0.0, 0.5]])
        positions = previous + np.array([[0.05, 0.01, 0.02], [0.02, -0.03, 0.01]])
        assert gradcheck(
            lambda p: loss_friction(p, Tensor(previous), capsule, mu=0.7, margin=0.01),
            [positions],
        ) < 1e-3

    def test_friction_finite_without_slip(self, capsule):
        resting = np.array([[0.5, 0.5, 0.0], [0.3, 0.0, 0.5]])
        positions = Tensor(resting, requires_grad=True)
        with Tape() as tape:
            loss = loss_friction(positions, Tensor(resting), capsule, mu=0.7, margin=0.01)
        grads = tape.backward(loss)
        assert np.isfinite(grads[positions]).all()

    def test_interp(self, capsule):
        positions = np.array([[0.5, 0.4, 0.1], [0.2, -0.3, 0.45]])
        assert gradcheck(lambda p: loss_interp(p, capsule, epsilon=0.05), [positions]) < 1e-3
