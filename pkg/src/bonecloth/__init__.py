# Area: Public API
# PRD: docs/prd-bonecloth.md
"""
bonecloth — Bone-driven neural garment simulation
=================================================

A garment is driven by virtual bones sampled on its surface: skeleton
joints pose the bones, a FiLM-modulated Bone-Net corrects them, and the
bones skin the garment. A UV-space Conv-MLP adds fine displacement. The
fast per-frame branch is trained against a stateful graph-network
integrator that learns from physics losses alone.

Quick start (command line)::

    python -m bonecloth gen-assets --kind hanging-swatch --out assets/swatch
    python -m bonecloth train --assets assets/swatch --out runs/swatch
    python -m bonecloth simulate --assets assets/swatch --model runs/swatch/model.bnck \\
        --poses assets/swatch/poses/heldout_000.bpos --out out/swatch.btrj

Quick start (Python)::

    from bonecloth import RunConfig, gen_assets, train, build_identity_cache, simulate

Error Types
-----------
All errors derive from :class:`BoneClothError` and carry structured
context (``operation``, ``details``) plus a boxed ``format_error_log()``.
"""

__version__ = "1.0.0"

from .config import RunConfig, load_config, dump_config, validate_config
from .errors import (
    BoneClothError,
    ShapeMismatchError,
    DegenerateInputError,
    NonFiniteError,
    TapeError,
    ConfigValidationError,
    AssetValidationError,
    FileFormatError,
    TrainingError,
    SessionStateError,
)
from .metrics import edge_error, area_error, collision_error, evaluate_sequence, format_report
from .types import EvalReport, BenchReport, AblationReport
from ._assets import gen_assets, read_bundle, write_bundle, ablate, ablate_bones
from ._networks import GarmentModel
from ._training import train, warmup_step, joint_step
from ._runtime import (
    IdentityCache,
    Session,
    bench,
    build_identity_cache,
    open_session,
    read_identity_cache,
    simulate,
    step_frame,
    write_identity_cache,
)

__all__ = [
    "__version__",
    "RunConfig",
    "load_config",
    "dump_config",
    "validate_config",
    "BoneClothError",
    "ShapeMismatchError",
    "DegenerateInputError",
    "NonFiniteError",
    "TapeError",
    "ConfigValidationError",
    "AssetValidationError",
    "FileFormatError",
    "TrainingError",
    "SessionStateError",
    "edge_error",
    "area_error",
    "collision_error",
    "evaluate_sequence",
    "format_report",
    "EvalReport",
    "BenchReport",
    "AblationReport",
    "gen_assets",
    "read_bundle",
    "write_bundle",
    "ablate",
    "ablate_bones",
    "GarmentModel",
    "train",
    "warmup_step",
    "joint_step",
    "IdentityCache",
    "Session",
    "bench",
    "build_identity_cache",
    "open_session",
    "read_identity_cache",
    "simulate",
    "step_frame",
    "write_identity_cache",
]
