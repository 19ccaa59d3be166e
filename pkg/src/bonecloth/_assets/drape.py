# Area: Assets
# PRD: docs/prd-bonecloth.md
"""
bonecloth._assets.drape — Quasi-static canonical drape
======================================================

Damped symplectic Euler on the rest-pose body. Internal forces are the
negative gradients of the summed stretch and bend energies (taken with
the tape); gravity acts on the lumped masses; pinned vertices stay at
their template positions. After every step vertices closer than the
collision margin are projected back onto the margin shell, so the drape
ends with zero collision energy.
"""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from ..config import MaterialConfig
from ..errors import NonFiniteError
from .._diffcore import ops
from .._diffcore.tape import Tape, Tensor, precision
from .._geometry.mesh import TriMesh
from .._geometry.sdf import BodySdf
from .._physics.integrator import SimState, integrate
from .._physics.losses import loss_bend, loss_collision, loss_stretch
from .._physics.material import garment_constants

logger = logging.getLogger("bonecloth.assets")

# projection lands this far beyond the margin so the cubic penalty is exactly zero
_SHELL_SLACK = 1e-6
_PROJECTION_PASSES = 3


def project_outside(sdf: BodySdf, points: np.ndarray, clearance: float) -> np.ndarray:
    """Move points with signed distance below *clearance* onto the clearance shell."""
    p = np.array(points, dtype=np.float64)
    for _ in range(_PROJECTION_PASSES):
        dist, winner, axis_point = sdf.closest(p)
        inside = np.flatnonzero(dist < clearance)
        if not inside.size:
            break
        offset = p[inside] - axis_point[inside]
        norm = np.linalg.norm(offset, axis=1, keepdims=True)
        direction = np.where(norm > 0, offset / np.where(norm > 0, norm, 1.0), np.array([0.0, 1.0, 0.0]))
        p[inside] = axis_point[inside] + direction * (sdf.radii[winner[inside]] + clearance)[:, None]
    return p


def drape(
    template: TriMesh,
    sdf: BodySdf,
    pinned: np.ndarray,
    material: MaterialConfig,
    gravity,
    steps: int,
    dt: float,
    damping: float,
    initial: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Returns the draped (V, 3) positions.

    Raises:
        NonFiniteError: the solver diverged (first offending vertex)
    """
    constants = garment_constants(template, material.density, pinned)
    masses = constants.masses[:, None]
    gravity = np.asarray(gravity, dtype=np.float64)
    clearance = material.collision_margin + _SHELL_SLACK
    drag = (1.0 - damping) / dt
    anchor = template.vertices[constants.pinned]

    state = SimState.at_rest(project_outside(sdf, template.vertices if initial is None else initial, clearance))
    for step in range(steps):
        with precision("float64"), Tape() as tape:
            x = Tensor(state.positions, requires_grad=True)
            energy = ops.add(
                loss_stretch(x, constants.edges, constants.rest_lengths, material.stretch_stiffness, reduction="sum"),
                loss_bend(x, constants.bend_stencils, constants.rest_angles, material.bend_stiffness, reduction="sum"),
            )
            grad = tape.backward(energy)[x]
        accel = (-grad + masses * gravity) / masses - drag * state.velocities
        try:
            state = integrate(state, accel, dt)
        except NonFiniteError:
            logger.error(f"Drape diverged at step {step}")
            raise
        positions = state.positions.copy()
        velocities = state.velocities.copy()
        positions[constants.pinned] = anchor
        velocities[constants.pinned] = 0.0
        projected = project_outside(sdf, positions, clearance)
        moved = np.any(projected != positions, axis=1)
        velocities[moved] = 0.0
        state = SimState(projected, velocities, state.previous, state.previous2)

    with precision("float64"):
        x = Tensor(state.positions)
        stretch = float(loss_stretch(x, constants.edges, constants.rest_lengths, material.stretch_stiffness).data)
        collision = float(loss_collision(x, sdf, material.collision_stiffness, material.collision_margin).data)
    logger.info(f"Drape finished after {steps} steps: stretch={stretch:.3e} collision={collision:.3e}")
    return state.positions
