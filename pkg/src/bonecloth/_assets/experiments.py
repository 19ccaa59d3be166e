# Area: Assets
# PRD: docs/prd-bonecloth.md
"""
bonecloth._assets.experiments — Ablation drivers
================================================

Each variant is a config override trained from scratch on one identity
and evaluated on its held-out sequences with the frame kernel.

    ablate_bones   bone count B ∈ {32, 64, 128}
    ablate         full / no-laplacian / no-interp / no-conv-mlp / direct
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Dict, Sequence

from ..config import RunConfig, override
from ..errors import ConfigValidationError
from ..types import AblationReport, AblationRow
from .._runtime.evaluate import evaluate_heldout
from .._shared.binio import PathLike, atomic_write_text
from .._training.trainer import train
from .bundle import read_bundle

logger = logging.getLogger("bonecloth.assets")

BONE_COUNTS = (32, 64, 128)

VARIANTS: Dict[str, Dict[str, dict]] = {
    "full": {},
    "no-laplacian": {"physics": {"weights": {"laplacian": 0.0}}},
    "no-interp": {"physics": {"weights": {"interp": 0.0}}},
    "no-conv-mlp": {"networks": {"use_conv_mlp": False}},
    "direct": {"training": {"supervision": "direct"}},
}


def _run_variant(name: str, config: RunConfig, asset_dir: PathLike, out: Path) -> AblationRow:
    result = train(config, [asset_dir], out)
    report = evaluate_heldout(result.model, read_bundle(asset_dir), config)
    atomic_write_text(out / "metrics.json", json.dumps(report, indent=1) + "\n")
    row: AblationRow = {
        "variant": name,
        "bone_count": result.model.bone_count,
        "edge_error": report["edge_error"]["mean"],
        "area_error": report["area_error"]["mean"],
        "collision_error": report["collision_error"]["mean"],
        "collision_std": report["collision_error"]["std"],
    }
    logger.info(f"Variant {name}: collision={row['collision_error']:.2f}% area={row['area_error']:.2f}%")
    return row


def ablate_bones(
    config: RunConfig,
    asset_dir: PathLike,
    out_dir: PathLike,
    bone_counts: Sequence[int] = BONE_COUNTS,
) -> AblationReport:
    out = Path(out_dir)
    rows = []
    for count in bone_counts:
        variant = override(config, kinematics={"bone_count": int(count)})
        rows.append(_run_variant(f"bones-{count}", variant, asset_dir, out / f"bones_{count}"))
    return {"kind": read_bundle(asset_dir).kind, "rows": rows}


def ablate(
    config: RunConfig,
    asset_dir: PathLike,
    out_dir: PathLike,
    variants: Sequence[str] = tuple(VARIANTS),
) -> AblationReport:
    """
    Raises:
        ConfigValidationError: an unknown variant name
    """
    unknown = [v for v in variants if v not in VARIANTS]
    if unknown:
        raise ConfigValidationError(
            f"Unknown ablation variant(s): {', '.join(unknown)}; choose from {', '.join(VARIANTS)}",
            operation="ablate",
        )
    out = Path(out_dir)
    rows = [
        _run_variant(name, override(config, **VARIANTS[name]), asset_dir, out / name)
        for name in variants
    ]
    return {"kind": read_bundle(asset_dir).kind, "rows": rows}


def format_ablation(report: AblationReport) -> str:
    lines = [
        f"{report['kind']}",
        f"{'variant':<14} {'B':>5} {'edge %':>9} {'area %':>9} {'coll %':>9} {'± %':>7}",
        "-" * 58,
    ]
    for row in report["rows"]:
        lines.append(
            f"{row['variant']:<14} {row['bone_count']:>5} {row['edge_error']:>9.3f} "
            f"{row['area_error']:>9.3f} {row['collision_error']:>9.3f} {row['collision_std']:>7.3f}"
        )
    return "\n".join(lines)
