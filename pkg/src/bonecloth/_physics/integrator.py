# Area: Physics
# PRD: docs/prd-bonecloth.md
"""
bonecloth._physics.integrator — Symplectic Euler
================================================

    v^t = v^{t−1} + Δt · a
    p^t = p^{t−1} + Δt · v^t

Velocity persists across frames; the state also keeps the two previous
position frames for the inertia term.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..errors import ConfigValidationError, NonFiniteError, ShapeMismatchError
from .._diffcore import ops
from .._diffcore.tape import Tensor


@dataclass(frozen=True, eq=False)
class SimState:
    """positions, velocities, previous and second-previous positions (V, 3)."""

    positions: np.ndarray
    velocities: np.ndarray
    previous: np.ndarray
    previous2: np.ndarray

    @classmethod
    def at_rest(cls, positions: np.ndarray, velocities: Optional[np.ndarray] = None) -> "SimState":
        p = np.asarray(positions, dtype=np.float64)
        v = np.zeros_like(p) if velocities is None else np.asarray(velocities, dtype=np.float64)
        return cls(p, v, p.copy(), p.copy())

    @property
    def vertex_count(self) -> int:
        return len(self.positions)


def _check_dt(dt: float) -> None:
    if not dt > 0:
        raise ConfigValidationError(f"Time step must be positive, got {dt}", operation="integrate", details={"dt": dt})


def _check_accel(accel: np.ndarray, count: int) -> None:
    if accel.shape != (count, 3):
        raise ShapeMismatchError("integrate", [accel.shape, (count, 3)])
    bad = np.flatnonzero(~np.isfinite(accel).all(axis=1))
    if bad.size:
        raise NonFiniteError("integrate", index=int(bad[0]))


def integrate(state: SimState, accel: np.ndarray, dt: float) -> SimState:
    """
    One step; the history window shifts by one frame.

    Raises:
        ConfigValidationError: dt is not positive
        NonFiniteError: accel contains NaN/Inf (first offending vertex)
    """
    _check_dt(dt)
    accel = np.asarray(accel, dtype=np.float64)
    _check_accel(accel, state.vertex_count)
    velocities = state.velocities + dt * accel
    positions = state.positions + dt * velocities
    return SimState(positions, velocities, state.positions, state.previous)


def integrate_tensor(positions: Tensor, velocities: Tensor, accel: Tensor, dt: float) -> Tuple[Tensor, Tensor]:
    """Differentiable step used inside training rollouts."""
    _check_dt(dt)
    _check_accel(accel.data, positions.shape[0])
    velocities = ops.add(velocities, ops.scale(accel, dt))
    positions = ops.add(positions, ops.scale(velocities, dt))
    return positions, velocities
