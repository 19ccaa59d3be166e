# Area: Physics
# PRD: docs/prd-bonecloth.md
"""Symplectic Euler integration and the differentiable loss terms."""

from .integrator import SimState, integrate, integrate_tensor
from .material import (
    ClothMaterial,
    LossWeights,
    GarmentConstants,
    garment_constants,
    vertex_masses,
    dihedral_angles,
)
from .losses import (
    loss_stretch,
    loss_bend,
    loss_collision,
    loss_inertia,
    loss_friction,
    loss_mse,
    loss_laplacian,
    loss_interp,
    inertia_target,
    gravity_offsets,
    physics_terms,
    weighted_total,
)

__all__ = [
    "SimState",
    "integrate",
    "integrate_tensor",
    "ClothMaterial",
    "LossWeights",
    "GarmentConstants",
    "garment_constants",
    "vertex_masses",
    "dihedral_angles",
    "loss_stretch",
    "loss_bend",
    "loss_collision",
    "loss_inertia",
    "loss_friction",
    "loss_mse",
    "loss_laplacian",
    "loss_interp",
    "inertia_target",
    "gravity_offsets",
    "physics_terms",
    "weighted_total",
]
