# Area: Assets
# PRD: docs/prd-bonecloth.md
"""Procedural bodies, garments, pose scripts, drapes and the ablation drivers."""

from .bodies import assemble_body, bar_body, biped_body, capsule_mesh, lower_body, swing_arm_body
from .garments import arm_swatch, grid_swatch, hanging_swatch, shirt, skirt, tube
from .motions import SCRIPTS, scripted_poses, sequence_set
from .drape import drape, project_outside
from .bundle import AssetBundle, body_and_garment, gen_assets, read_bundle, write_bundle
from .experiments import BONE_COUNTS, VARIANTS, ablate, ablate_bones, format_ablation

__all__ = [
    "assemble_body",
    "bar_body",
    "biped_body",
    "capsule_mesh",
    "lower_body",
    "swing_arm_body",
    "arm_swatch",
    "grid_swatch",
    "hanging_swatch",
    "shirt",
    "skirt",
    "tube",
    "SCRIPTS",
    "scripted_poses",
    "sequence_set",
    "drape",
    "project_outside",
    "AssetBundle",
    "body_and_garment",
    "gen_assets",
    "read_bundle",
    "write_bundle",
    "BONE_COUNTS",
    "VARIANTS",
    "ablate",
    "ablate_bones",
    "format_ablation",
]
