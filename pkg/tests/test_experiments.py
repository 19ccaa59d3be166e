# Area: Acceptance Tests
# PRD: docs/prd-bonecloth.md
"""Long training experiments: toy-scene gates and ablation directions (run with --runslow)."""

import numpy as np
import pytest

from bonecloth.config import override
from bonecloth._assets import BONE_COUNTS, ablate, ablate_bones, gen_assets, read_bundle, write_bundle
from bonecloth._runtime import evaluate_heldout
from bonecloth._training import train

pytestmark = pytest.mark.slow

TOY = {
    "geometry": {"uv_height": 16, "uv_width": 16},
    "kinematics": {"bone_count": 32},
    "networks": {
        "bone_net_hidden": [64, 64],
        "conv_layers": 2,
        "conv_channels": 8,
        "latent_dim": 16,
        "message_rounds": 2,
        "max_joints": 24,
    },
    "training": {"warmup_epochs": 40, "total_epochs": 160, "window_length": 3, "checkpoint_every": 40},
    "assets": {
        "grid_rows": 12,
        "grid_cols": 12,
        "skirt_rings": 10,
        "skirt_segments": 20,
        "sequence_frames": 40,
        "train_sequences": 3,
        "heldout_sequences": 2,
        "drape_steps": 400,
    },
}


def _toy_config(tiny_config, kind):
    config = override(tiny_config, **TOY)
    return override(config, assets={"kind": kind})


def _write(tmp_path_factory, config):
    root = tmp_path_factory.mktemp("toy") / config.assets.kind
    write_bundle(root, gen_assets(config))
    return root


def _rows(report):
    return {row["variant"]: row for row in report["rows"]}


class TestToyGates:
    """One identity trained with the full schedule."""

    @pytest.fixture(scope="class", params=["hanging-swatch", "swing-arm"])
    def run(self, request, tiny_config, tmp_path_factory):
        config = _toy_config(tiny_config, request.param)
        assets = _write(tmp_path_factory, config)
        result = train(config, [assets], tmp_path_factory.mktemp("run"))
        return config, assets, result

    def test_warmup_halves_physics_loss(self, run):
        config, _, result = run
        warmup = [row["physics_loss"] for row in result.state.history[: config.training.warmup_epochs]]
        assert np.mean(warmup[-2:]) <= 0.5 * np.mean(warmup[:2])

    def test_consistency_loss_falls_to_a_quarter(self, run):
        config, _, result = run
        joint = [row["mse"] for row in result.state.history[config.training.warmup_epochs:]]
        assert joint[-1] <= 0.25 * joint[0]

    def test_heldout_collisions_below_two_percent(self, run):
        config, assets, result = run
        report = evaluate_heldout(result.model, read_bundle(assets), config)
        assert report["collision_error"]["mean"] < 2.0


class TestAblationDirections:
    """Skirt-tube ablations move the metrics the way the components claim."""

    @pytest.fixture(scope="class")
    def skirt(self, tiny_config, tmp_path_factory):
        config = _toy_config(tiny_config, "skirt-tube")
        return config, _write(tmp_path_factory, config)

    def test_more_bones_never_collide_more(self, skirt, tmp_path):
        config, assets = skirt
        report = ablate_bones(config, assets, tmp_path, BONE_COUNTS)
        collision = [row["collision_error"] for row in report["rows"]]
        assert [row["bone_count"] for row in report["rows"]] == list(BONE_COUNTS)
        assert all(later <= earlier for earlier, later in zip(collision, collision[1:]))

    def test_component_ablations_hurt(self, skirt, tmp_path):
        config, assets = skirt
        rows = _rows(ablate(config, assets, tmp_path, ["full", "no-interp", "no-conv-mlp"]))
        assert rows["no-interp"]["collision_error"] > rows["full"]["collision_error"]
        assert rows["no-conv-mlp"]["area_error"] > rows["full"]["area_error"]
