# Area: Metrics
# PRD: docs/prd-bonecloth.md
"""
bonecloth.metrics — Edge, area and collision error
==================================================

    edge       100 × mean_e |‖e_posed‖ − ‖e_rest‖| / ‖e_rest‖
    area       100 × mean_f |A_posed − A_rest| / A_rest
    collision  100 × #{v : d_v < 0} / |V|     (d_v = 0 counts as outside)

Sequence reports average each metric per frame, then over frames, and
carry the per-frame series and standard deviation.
"""

from __future__ import annotations

from typing import List, Sequence

import numpy as np

from .errors import DegenerateInputError, ShapeMismatchError
from ._geometry.mesh import TriMesh
from ._geometry.sdf import BodySdf, signed_distance
from .types import EvalReport, MetricSummary


def _check_positions(operation: str, rest: TriMesh, positions: np.ndarray) -> np.ndarray:
    positions = np.asarray(positions, dtype=np.float64)
    if positions.shape != rest.vertices.shape:
        raise ShapeMismatchError(operation, [rest.vertices.shape, positions.shape])
    return positions


def edge_error(rest: TriMesh, positions: np.ndarray) -> float:
    """
    Raises:
        DegenerateInputError: a rest edge has zero length
    """
    positions = _check_positions("edge_error", rest, positions)
    rest_len = rest.edge_lengths()
    bad = np.flatnonzero(rest_len <= 0)
    if bad.size:
        raise DegenerateInputError("edge_error", "zero-length rest edge", index=int(bad[0]))
    posed_len = rest.edge_lengths(positions)
    return float(100.0 * np.mean(np.abs(posed_len - rest_len) / rest_len))


def area_error(rest: TriMesh, positions: np.ndarray) -> float:
    """
    Raises:
        DegenerateInputError: a rest face has zero area
    """
    positions = _check_positions("area_error", rest, positions)
    rest_area = rest.face_areas()
    bad = np.flatnonzero(rest_area <= 0)
    if bad.size:
        raise DegenerateInputError("area_error", "zero-area rest face", index=int(bad[0]))
    posed_area = rest.face_areas(positions)
    return float(100.0 * np.mean(np.abs(posed_area - rest_area) / rest_area))


def collision_error(positions: np.ndarray, sdf: BodySdf) -> float:
    positions = np.asarray(positions, dtype=np.float64)
    if len(positions) == 0:
        return 0.0
    inside = signed_distance(sdf, positions) < 0
    return float(100.0 * np.count_nonzero(inside) / len(positions))


def _summary(series: List[float]) -> MetricSummary:
    if not series:
        return {"mean": 0.0, "std": 0.0}
    values = np.asarray(series, dtype=np.float64)
    return {"mean": float(values.mean()), "std": float(values.std())}


def evaluate_sequence(rest: TriMesh, frames: np.ndarray, sdfs: Sequence[BodySdf]) -> EvalReport:
    """Per-frame metrics for a (T, V, 3) trajectory against matching body SDFs."""
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 3 or len(frames) != len(sdfs):
        raise ShapeMismatchError("evaluate_sequence", [frames.shape, (len(sdfs),)], "(T, V, 3) with T body frames")
    edges = [edge_error(rest, f) for f in frames]
    areas = [area_error(rest, f) for f in frames]
    collisions = [collision_error(f, s) for f, s in zip(frames, sdfs)]
    return {
        "frames": len(frames),
        "edge_error": _summary(edges),
        "area_error": _summary(areas),
        "collision_error": _summary(collisions),
        "edge_series": edges,
        "area_series": areas,
        "collision_series": collisions,
    }


def merge_reports(reports: Sequence[EvalReport]) -> EvalReport:
    """Concatenate the per-frame series of several sequences."""
    edges = [v for r in reports for v in r["edge_series"]]
    areas = [v for r in reports for v in r["area_series"]]
    collisions = [v for r in reports for v in r["collision_series"]]
    return {
        "frames": len(edges),
        "edge_error": _summary(edges),
        "area_error": _summary(areas),
        "collision_error": _summary(collisions),
        "edge_series": edges,
        "area_series": areas,
        "collision_series": collisions,
    }


def format_report(report: EvalReport) -> str:
    """Plain-text table of the three metrics."""
    lines = [
        f"{'metric':<10} {'mean %':>10} {'std %':>10}",
        "-" * 32,
    ]
    for label, key in (("edge", "edge_error"), ("area", "area_error"), ("collision", "collision_error")):
        summary = report[key]
        lines.append(f"{label:<10} {summary['mean']:>10.4f} {summary['std']:>10.4f}")
    lines.append(f"frames: {report['frames']}")
    return "\n".join(lines)
