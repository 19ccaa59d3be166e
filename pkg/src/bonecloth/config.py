# Area: Shared
# PRD: docs/prd-bonecloth.md
"""
bonecloth.config — Run configuration
====================================

Every tunable in the package lives in one pydantic model tree. Unknown
keys are rejected, so a typo in a config file fails loudly instead of
silently training with a default. Config files are JSON; environment
variables are never consulted.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigValidationError

logger = logging.getLogger("bonecloth.config")

AssetKind = Literal["capsule-biped", "swing-arm", "hanging-swatch", "skirt-tube"]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GeometryConfig(_Section):
    """UV grid and bone sampling."""
    uv_height: int = Field(64, ge=1)
    uv_width: int = Field(64, ge=1)
    # None -> garment vertex with lowest canonical y (the hem)
    fps_seed_index: Optional[int] = Field(None, ge=0)


class KinematicsConfig(_Section):
    """Virtual-bone rig construction."""
    bone_count: int = Field(128, ge=1)
    # sigma = sigma_scale * mean nearest-bone geodesic distance, unless sigma is set
    sigma_scale: float = Field(0.5, gt=0)
    sigma: Optional[float] = Field(None, gt=0)


class NetworksConfig(_Section):
    """Network widths and depths."""
    shape_dim: int = Field(32, ge=1)
    feature_dim: int = Field(16, ge=1)
    pose_embed_dim: int = Field(16, ge=1)
    bone_net_hidden: Tuple[int, ...] = (256, 256, 256, 256)
    modulator_hidden: int = Field(64, ge=1)
    conv_layers: int = Field(4, ge=1)
    conv_channels: int = Field(32, ge=1)
    latent_dim: int = Field(32, ge=1)
    message_rounds: int = Field(4, ge=1)
    body_neighbors: int = Field(3, ge=1)
    proximity_radius: float = Field(0.03, gt=0)
    max_joints: int = Field(24, ge=1)
    use_conv_mlp: bool = True


class MaterialConfig(_Section):
    """Cloth material."""
    stretch_stiffness: float = Field(100.0, ge=0)
    bend_stiffness: float = Field(1e-3, ge=0)
    density: float = Field(0.2, gt=0)
    friction: float = Field(0.5, ge=0)
    collision_stiffness: float = Field(1.0, ge=0)
    collision_margin: float = Field(0.004, ge=0)


class LossWeightConfig(_Section):
    """Weights of the physics loss and the cross-branch loss."""
    stretch: float = Field(1.0, ge=0)
    bend: float = Field(0.05, ge=0)
    collision: float = Field(1e3, ge=0)
    inertia: float = Field(1.0, ge=0)
    friction: float = Field(0.1, ge=0)
    mse: float = Field(1.0, ge=0)
    laplacian: float = Field(1.0, ge=0)
    interp: float = Field(1.0, ge=0)


class PhysicsConfig(_Section):
    material: MaterialConfig = MaterialConfig()
    weights: LossWeightConfig = LossWeightConfig()
    gravity: Tuple[float, float, float] = (0.0, -9.81, 0.0)
    gravity_in_inertia: bool = True
    interp_epsilon: float = Field(0.004, ge=0)
    dt: float = Field(1.0 / 30.0, gt=0)


class TrainingConfig(_Section):
    """Two-phase schedule and optimizer."""
    warmup_epochs: int = Field(50, ge=1)
    total_epochs: int = Field(2000, ge=1)
    # frames the dynamics teacher integrates per training window
    window_length: int = Field(3, ge=1)
    windows_per_epoch: int = Field(1, ge=1)
    learning_rate: float = Field(1e-3, gt=0)
    beta1: float = Field(0.9, ge=0, lt=1)
    beta2: float = Field(0.999, ge=0, lt=1)
    adam_eps: float = Field(1e-8, gt=0)
    checkpoint_every: int = Field(100, ge=1)
    instability_threshold: float = Field(50.0, ge=0, le=100)
    supervision: Literal["teacher", "direct"] = "teacher"
    identities: List[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _schedule(self) -> "TrainingConfig":
        if not self.warmup_epochs <= self.total_epochs:
            raise ValueError("warmup_epochs must not exceed total_epochs")
        return self


class RuntimeConfig(_Section):
    bench_frames: int = Field(1000, ge=1)
    bench_warmup_frames: int = Field(10, ge=0)


class AssetConfig(_Section):
    """Procedural asset generation."""
    kind: AssetKind = "hanging-swatch"
    grid_rows: int = Field(20, ge=2)
    grid_cols: int = Field(20, ge=2)
    swatch_size: float = Field(0.5, gt=0)
    skirt_rings: int = Field(12, ge=2)
    skirt_segments: int = Field(24, ge=3)
    sequence_frames: int = Field(90, ge=4)
    train_sequences: int = Field(3, ge=1)
    heldout_sequences: int = Field(3, ge=1)
    drape_steps: int = Field(3000, ge=1)
    drape_dt: float = Field(1e-3, gt=0)
    drape_damping: float = Field(0.98, gt=0, le=1)


class RunConfig(_Section):
    """Effective configuration of one command invocation."""
    seed: int = 0
    output_dir: str = "runs/default"
    log_file: str = "bonecloth.log"
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"
    geometry: GeometryConfig = GeometryConfig()
    kinematics: KinematicsConfig = KinematicsConfig()
    networks: NetworksConfig = NetworksConfig()
    physics: PhysicsConfig = PhysicsConfig()
    training: TrainingConfig = TrainingConfig()
    runtime: RuntimeConfig = RuntimeConfig()
    assets: AssetConfig = AssetConfig()


def validate_config(data: dict) -> RunConfig:
    """
    Validate a raw config mapping.

    Raises:
        ConfigValidationError: on unknown keys or out-of-range values
    """
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        reasons = [
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        ]
        raise ConfigValidationError(
            f"Invalid config: {'; '.join(reasons)}",
            operation="validate_config",
            reasons=reasons,
        ) from None


def load_config(config_path: Optional[str]) -> RunConfig:
    """Load config from a JSON file; defaults when no path is given."""
    if not config_path:
        return RunConfig()
    path = Path(config_path)
    if not path.exists():
        raise ConfigValidationError(
            f"Config file not found: {path}", operation="load_config"
        )
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigValidationError(
            f"Config file is not valid JSON: {e}", operation="load_config"
        ) from None
    config = validate_config(data)
    logger.debug(f"Loaded config from {path}")
    return config


def override(config: RunConfig, **sections) -> RunConfig:
    """Return a copy with nested section fields replaced, re-validated."""
    data = config.model_dump()
    for key, value in sections.items():
        if isinstance(value, dict) and isinstance(data.get(key), dict):
            data[key] = _merge(data[key], value)
        else:
            data[key] = value
    return validate_config(data)


def _merge(base: dict, patch: dict) -> dict:
    merged = dict(base)
    for key, value in patch.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def dump_config(config: RunConfig) -> str:
    """Render the effective config as JSON."""
    return json.dumps(config.model_dump(mode="json"), indent=2, sort_keys=True)
