# Area: Runtime
# PRD: docs/prd-bonecloth.md
"""Per-stage timing of the frame kernel, and the dynamics teacher's per-frame cost for comparison."""

from __future__ import annotations

import logging
import time
from typing import Dict

import numpy as np

from ..config import RunConfig
from ..types import BenchReport, StageTiming
from .._kinematics.poses import PoseSequence
from .._networks.model import GarmentModel
from .._training.identity import Identity
from .._training.rollout import start_history, step_teacher
from .cache import IdentityCache
from .plan import STAGES
from .session import open_session

logger = logging.getLogger("bonecloth.runtime")


def _timing(ns: np.ndarray) -> StageTiming:
    ms = ns.astype(np.float64) / 1e6
    return {
        "mean_ms": float(ms.mean()),
        "p50_ms": float(np.percentile(ms, 50)),
        "p99_ms": float(np.percentile(ms, 99)),
    }


def bench(
    model: GarmentModel,
    cache: IdentityCache,
    poses: PoseSequence,
    frames: int = 1000,
    warmup_frames: int = 10,
    teacher_ms: float = 0.0,
) -> BenchReport:
    """
    Step a session through *poses* (cycled) for warm-up plus *frames*
    measured frames.
    """
    session = open_session(model, cache)
    plan = session.plan
    stage_ns = np.zeros((frames, len(STAGES)), dtype=np.int64)
    total_ns = np.zeros(frames, dtype=np.int64)
    for i in range(warmup_frames + frames):
        session.step(poses.frames[i % poses.frame_count])
        if i >= warmup_frames:
            stage_ns[i - warmup_frames] = plan.stage_ns
            total_ns[i - warmup_frames] = session.last_ns
    stages: Dict[str, StageTiming] = {name: _timing(stage_ns[:, j]) for j, name in enumerate(STAGES)}
    report: BenchReport = {
        "frames": frames,
        "warmup_frames": warmup_frames,
        "garment_vertices": cache.vertex_count,
        "stages": stages,
        "total": _timing(total_ns),
        "stage_sum_ms": float(sum(s["mean_ms"] for s in stages.values())),
        "teacher_ms": float(teacher_ms),
    }
    logger.info(
        f"Bench: {report['total']['mean_ms']:.3f} ms/frame mean over {frames} frames "
        f"({cache.vertex_count} vertices)"
    )
    return report


def teacher_frame_ms(model: GarmentModel, identity: Identity, config: RunConfig, frames: int = 20) -> float:
    """Mean wall time of one dynamics-teacher frame (graph build, prediction, integration, physics terms)."""
    sequence = (identity.heldout or identity.train)[0]
    steps = max(1, min(frames, sequence.frame_count - 3))
    history = start_history(identity, sequence, 2, config)
    start = time.perf_counter_ns()
    for _ in range(steps):
        history, _ = step_teacher(model, identity, sequence, history, config)
    return (time.perf_counter_ns() - start) / steps / 1e6


def format_bench(report: BenchReport) -> str:
    lines = [f"{'stage':<12} {'mean ms':>10} {'p50 ms':>10} {'p99 ms':>10}", "-" * 45]
    rows = list(report["stages"].items()) + [("total", report["total"])]
    for name, t in rows:
        lines.append(f"{name:<12} {t['mean_ms']:>10.4f} {t['p50_ms']:>10.4f} {t['p99_ms']:>10.4f}")
    if report["teacher_ms"]:
        lines.append(f"{'teacher':<12} {report['teacher_ms']:>10.4f}")
    return "\n".join(lines)
