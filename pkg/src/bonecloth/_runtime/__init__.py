"""Inference path: identity cache, frame kernel, sessions and benchmarking."""

from .cache import IdentityCache, build_identity_cache, read_identity_cache, write_identity_cache
from .plan import STAGES, FramePlan, padded_rows
from .session import Session, open_session, simulate, step_frame
from .bench import bench, format_bench, teacher_frame_ms
from .evaluate import evaluate_heldout, evaluate_trajectory
from .trajectory import read_trajectory, write_obj_frames, write_trajectory

__all__ = [
    "IdentityCache",
    "build_identity_cache",
    "read_identity_cache",
    "write_identity_cache",
    "STAGES",
    "FramePlan",
    "padded_rows",
    "Session",
    "open_session",
    "simulate",
    "step_frame",
    "bench",
    "format_bench",
    "teacher_frame_ms",
    "evaluate_heldout",
    "evaluate_trajectory",
    "read_trajectory",
    "write_obj_frames",
    "write_trajectory",
]
