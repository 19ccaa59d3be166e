# Area: Runtime
# PRD: docs/prd-bonecloth.md
"""
bonecloth._runtime.session — Per-frame inference sessions
=========================================================

A session keeps the last three posed bone positions and joint rotations.
The first frame fills every slot, so frames 0 and 1 see a held pose.
Output depends only on the cache and that window.
"""

from __future__ import annotations

import logging
import time
from typing import Optional

import numpy as np

from ..errors import SessionStateError, ShapeMismatchError
from .._kinematics.poses import PoseSequence
from .._networks.model import GarmentModel
from .cache import IdentityCache
from .plan import FramePlan

logger = logging.getLogger("bonecloth.runtime")

WINDOW = 3


class Session:
    """Single-writer rolling window over one :class:`FramePlan`."""

    def __init__(self, plan: Optional[FramePlan] = None):
        self.plan = plan
        self.frame = 0
        self.last_ns = 0
        if plan is not None:
            self.bone_window = np.zeros((WINDOW, plan.bone_count, 3))
            self.pose_window = np.zeros((WINDOW, plan.joint_count, 6))

    @property
    def is_open(self) -> bool:
        return self.plan is not None

    def reset(self) -> None:
        self.frame = 0

    def close(self) -> None:
        self.plan = None

    def step(self, pose: np.ndarray) -> np.ndarray:
        """
        Advance one frame with the (K, 6) joint rotations θ^t.

        Returns the (V, 3) float32 output buffer; the next call overwrites it.

        Raises:
            SessionStateError: the session was never opened or was closed
            ShapeMismatchError: wrong joint count
        """
        plan = self.plan
        if plan is None:
            raise SessionStateError("step_frame on a session that is not open", operation="step_frame")
        pose = np.asarray(pose)
        if pose.shape != (plan.joint_count, 6):
            raise ShapeMismatchError("step_frame", [pose.shape, (plan.joint_count, 6)], "(K, 6) joint rotations")
        start = time.perf_counter_ns()
        bones, poses = self.bone_window, self.pose_window
        if self.frame:
            np.copyto(bones[0], bones[1])
            np.copyto(bones[1], bones[2])
            np.copyto(poses[0], poses[1])
            np.copyto(poses[1], poses[2])
        np.copyto(poses[2], pose, casting="same_kind")
        plan.bones_lbs(poses[2], bones[2])
        if not self.frame:
            np.copyto(bones[0], bones[2])
            np.copyto(bones[1], bones[2])
            np.copyto(poses[0], poses[2])
            np.copyto(poses[1], poses[2])
        plan.stage_ns[0] = time.perf_counter_ns() - start
        out = plan.run(bones, poses)
        self.last_ns = time.perf_counter_ns() - start
        self.frame += 1
        return out


def open_session(model: GarmentModel, cache: IdentityCache) -> Session:
    return Session(FramePlan(model, cache))


def step_frame(session: Session, pose: np.ndarray) -> np.ndarray:
    return session.step(pose)


def simulate(model: GarmentModel, cache: IdentityCache, poses: PoseSequence) -> np.ndarray:
    """(T, V, 3) float32 trajectory of one pose sequence from a fresh session."""
    session = open_session(model, cache)
    frames = np.empty((poses.frame_count, cache.vertex_count, 3), dtype=np.float32)
    for t, pose in enumerate(poses.frames):
        frames[t] = session.step(pose)
    logger.info(f"Simulated {poses.frame_count} frames")
    return frames
