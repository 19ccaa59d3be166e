# Area: Runtime
# PRD: docs/prd-bonecloth.md
"""Metrics of simulated trajectories against the posed body of each frame."""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from ..config import RunConfig
from ..errors import ShapeMismatchError
from ..metrics import evaluate_sequence, merge_reports
from ..types import EvalReport
from .._assets.bundle import AssetBundle
from .._kinematics.body import posed_sdf
from .._kinematics.poses import PoseSequence
from .._kinematics.skeleton import skinning_transforms
from .._networks.model import GarmentModel
from .cache import IdentityCache, build_identity_cache
from .session import simulate

logger = logging.getLogger("bonecloth.runtime")


def evaluate_trajectory(bundle: AssetBundle, poses: PoseSequence, positions: np.ndarray) -> EvalReport:
    """Edge and area error against the rest template; collision error against the body posed by *poses*."""
    if len(positions) != poses.frame_count:
        raise ShapeMismatchError("evaluate_trajectory", [np.shape(positions), poses.frames.shape], "one pose per frame")
    skeleton = bundle.body.skeleton
    sdfs = [posed_sdf(bundle.body, skinning_transforms(skeleton, pose)) for pose in poses.frames]
    return evaluate_sequence(bundle.template, positions, sdfs)


def evaluate_heldout(
    model: GarmentModel,
    bundle: AssetBundle,
    config: RunConfig,
    cache: Optional[IdentityCache] = None,
) -> EvalReport:
    """The pose deformer on every held-out sequence, merged into one report."""
    if cache is None:
        cache = build_identity_cache(model, bundle, config)
    reports = [evaluate_trajectory(bundle, seq, simulate(model, cache, seq)) for seq in bundle.heldout]
    report = merge_reports(reports)
    logger.info(
        f"Held-out: edge={report['edge_error']['mean']:.2f}% "
        f"area={report['area_error']['mean']:.2f}% collision={report['collision_error']['mean']:.2f}%"
    )
    return report
