# Area: Public API
# PRD: docs/prd-bonecloth.md
"""Report TypedDicts written by the metrics, bench and ablation commands."""
from typing import Dict, List, TypedDict

class MetricSummary(TypedDict):
    """Mean and standard deviation across frames, in percent."""
    mean: float
    std: float

class EvalReport(TypedDict):
    """Edge, area and collision summaries plus per-frame series."""
    frames: int
    edge_error: MetricSummary
    area_error: MetricSummary
    collision_error: MetricSummary
    edge_series: List[float]
    area_series: List[float]
    collision_series: List[float]

class StageTiming(TypedDict):
    """Wall time of one pipeline stage in milliseconds."""
    mean_ms: float
    p50_ms: float
    p99_ms: float

class BenchReport(TypedDict):
    """Per-stage timing over the measured frames."""
    frames: int
    warmup_frames: int
    garment_vertices: int
    stages: Dict[str, StageTiming]
    total: StageTiming
    stage_sum_ms: float
    teacher_ms: float       # dynamics-teacher rollout per frame, 0 when not measured

class AblationRow(TypedDict):
    """One trained variant and its held-out metrics."""
    variant: str
    bone_count: int
    edge_error: float
    area_error: float
    collision_error: float
    collision_std: float

class AblationReport(TypedDict):
    kind: str
    rows: List[AblationRow]
