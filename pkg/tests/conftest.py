# Area: Test Support
# PRD: docs/prd-bonecloth.md
"""Shared fixtures: a tiny run config and one generated hanging-swatch identity."""

import logging

import numpy as np
import pytest

from bonecloth.config import RunConfig, validate_config
from bonecloth._assets.bundle import gen_assets, write_bundle
from bonecloth._networks.model import GarmentModel
from bonecloth._shared.logging_formatters import disable_quiet_mode

TINY = {
    "seed": 7,
    "geometry": {"uv_height": 8, "uv_width": 8},
    "kinematics": {"bone_count": 6},
    "networks": {
        "shape_dim": 4,
        "feature_dim": 3,
        "pose_embed_dim": 3,
        "bone_net_hidden": [16, 16],
        "modulator_hidden": 8,
        "conv_layers": 1,
        "conv_channels": 4,
        "latent_dim": 8,
        "message_rounds": 1,
        "body_neighbors": 2,
        "max_joints": 4,
    },
    "training": {"warmup_epochs": 2, "total_epochs": 4, "window_length": 2, "checkpoint_every": 2},
    "runtime": {"bench_frames": 5, "bench_warmup_frames": 1},
    "assets": {
        "kind": "hanging-swatch",
        "grid_rows": 5,
        "grid_cols": 5,
        "swatch_size": 0.3,
        "sequence_frames": 10,
        "train_sequences": 2,
        "heldout_sequences": 1,
        "drape_steps": 20,
    },
}


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow acceptance experiments")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def reset_package_logger():
    """setup_logging() detaches the package logger from root; undo that after each test."""
    yield
    pkg_logger = logging.getLogger("bonecloth")
    for handler in list(pkg_logger.handlers):
        pkg_logger.removeHandler(handler)
        handler.close()
    pkg_logger.propagate = True
    pkg_logger.setLevel(logging.NOTSET)
    disable_quiet_mode()


@pytest.fixture(scope="session")
def tiny_config() -> RunConfig:
    return validate_config(TINY)


@pytest.fixture(scope="session")
def swatch_bundle(tiny_config):
    return gen_assets(tiny_config)


@pytest.fixture(scope="session")
def swatch_dir(tmp_path_factory, swatch_bundle):
    root = tmp_path_factory.mktemp("assets") / "swatch"
    write_bundle(root, swatch_bundle)
    return root


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def trained_like(tiny_config):
    """A model whose zero-initialized heads are no longer zero."""
    model = GarmentModel(tiny_config.networks, bone_count=6, seed=tiny_config.seed)
    noise = np.random.default_rng(5)
    for _, tensor in model.params.items():
        tensor.data = (tensor.data + noise.normal(scale=0.05, size=tensor.shape)).astype(tensor.data.dtype)
    return model
