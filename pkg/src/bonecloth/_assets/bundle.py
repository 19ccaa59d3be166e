# Area: Assets
# PRD: docs/prd-bonecloth.md
"""
bonecloth._assets.bundle — Asset directories and gen_assets
===========================================================

An asset directory holds one identity (body + garment) and its poses::

    body.json            skinned capsule body
    template.obj         garment rest template (physics rest state)
    canonical.obj        quasi-static drape on the rest-pose body
    garment.json         {"format", "version", "kind", "pinned"}
    poses/train_NNN.bpos
    poses/heldout_NNN.bpos

Pinned vertices follow the body with the skin weights of their nearest
body vertex; these are derived on load, not stored.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple

import numpy as np
from scipy.spatial import cKDTree

from ..config import RunConfig
from ..errors import AssetValidationError
from .._geometry.mesh import TriMesh, read_obj, write_obj
from .._kinematics.body import SkinnedBody, pose_vertices, read_body, rest_sdf, write_body
from .._kinematics.poses import PoseSequence, read_poses, write_poses
from .._networks.graph import KIND_CLOTH, KIND_PINNED
from .._shared.binio import PathLike, atomic_write_text
from . import bodies, garments
from .drape import drape
from .motions import sequence_set

logger = logging.getLogger("bonecloth.assets")

GARMENT_FORMAT = "bonecloth-garment"
GARMENT_VERSION = 1


@dataclass(frozen=True, eq=False)
class AssetBundle:
    kind: str
    body: SkinnedBody
    template: TriMesh
    canonical: TriMesh
    pinned: np.ndarray
    train: List[PoseSequence]
    heldout: List[PoseSequence]

    @property
    def pin_weights(self) -> np.ndarray:
        """(P, K) skin weights of the nearest body vertex of each pinned vertex."""
        if not len(self.pinned):
            return np.zeros((0, self.body.joint_count))
        _, nearest = cKDTree(self.body.mesh.vertices).query(self.canonical.vertices[self.pinned])
        return self.body.skin_weights[nearest]

    def garment_kinds(self) -> np.ndarray:
        kinds = np.full(self.canonical.vertex_count, KIND_CLOTH, dtype=np.int64)
        kinds[self.pinned] = KIND_PINNED
        return kinds

    def pinned_positions(self, transforms: np.ndarray, pin_weights: np.ndarray) -> np.ndarray:
        """World positions of the pinned vertices for (K, 4, 4) skinning transforms."""
        return pose_vertices(pin_weights, transforms, self.canonical.vertices[self.pinned])


def body_and_garment(kind: str, config: RunConfig) -> Tuple[SkinnedBody, TriMesh, np.ndarray]:
    assets = config.assets
    if kind == "hanging-swatch":
        mesh, pinned = garments.hanging_swatch(assets.grid_rows, assets.grid_cols, assets.swatch_size)
        return bodies.bar_body(assets.swatch_size / 2), mesh, pinned
    if kind == "swing-arm":
        mesh, pinned = garments.arm_swatch(assets.grid_rows, assets.grid_cols, assets.swatch_size)
        return bodies.swing_arm_body(), mesh, pinned
    if kind == "skirt-tube":
        mesh, pinned = garments.skirt(assets.skirt_rings, assets.skirt_segments)
        return bodies.lower_body(), mesh, pinned
    if kind == "capsule-biped":
        mesh, pinned = garments.shirt(assets.skirt_rings, assets.skirt_segments)
        return bodies.biped_body(), mesh, pinned
    raise AssetValidationError(f"Unknown asset kind '{kind}'", operation="gen_assets")


def gen_assets(config: RunConfig) -> AssetBundle:
    """Build body, garment template, canonical drape and pose sequences."""
    assets = config.assets
    body, template, pinned = body_and_garment(assets.kind, config)
    logger.info(
        f"Generating {assets.kind}: {template.vertex_count} garment vertices, "
        f"{template.face_count} faces, {body.joint_count} joints"
    )
    draped = drape(
        template,
        rest_sdf(body),
        pinned,
        config.physics.material,
        config.physics.gravity,
        assets.drape_steps,
        assets.drape_dt,
        assets.drape_damping,
    )
    dt = config.physics.dt
    frames = assets.sequence_frames
    return AssetBundle(
        kind=assets.kind,
        body=body,
        template=template,
        canonical=template.with_vertices(draped),
        pinned=np.asarray(pinned, dtype=np.int64),
        train=sequence_set(assets.kind, body.joint_count, assets.train_sequences, frames, dt, config.seed),
        heldout=sequence_set(assets.kind, body.joint_count, assets.heldout_sequences, frames, dt, config.seed, heldout=True),
    )


def write_bundle(directory: PathLike, bundle: AssetBundle) -> None:
    root = Path(directory)
    write_body(root / "body.json", bundle.body)
    write_obj(root / "template.obj", bundle.template)
    write_obj(root / "canonical.obj", bundle.canonical)
    meta = {
        "format": GARMENT_FORMAT,
        "version": GARMENT_VERSION,
        "kind": bundle.kind,
        "pinned": [int(i) for i in bundle.pinned],
    }
    atomic_write_text(root / "garment.json", json.dumps(meta, indent=1) + "\n")
    for prefix, sequences in (("train", bundle.train), ("heldout", bundle.heldout)):
        for i, seq in enumerate(sequences):
            write_poses(root / "poses" / f"{prefix}_{i:03d}.bpos", seq)
    logger.info(f"Wrote assets to {root}")


def read_bundle(directory: PathLike) -> AssetBundle:
    """
    Raises:
        AssetValidationError: missing files, topology disagreement between
            template and drape, or pinned indices out of range
        FileFormatError: malformed OBJ or pose files
    """
    root = Path(directory)
    for name in ("body.json", "template.obj", "canonical.obj", "garment.json"):
        if not (root / name).exists():
            raise AssetValidationError(f"Asset file missing: {root / name}", operation="read_assets")
    body = read_body(root / "body.json")
    template = read_obj(root / "template.obj")
    canonical = read_obj(root / "canonical.obj")
    if template.vertex_count != canonical.vertex_count or not np.array_equal(template.faces, canonical.faces):
        raise AssetValidationError(f"{root}: template and canonical drape differ in topology", operation="read_assets")
    with open(root / "garment.json", encoding="utf-8") as f:
        try:
            meta = json.load(f)
        except json.JSONDecodeError as e:
            raise AssetValidationError(f"{root / 'garment.json'}: invalid JSON ({e})", operation="read_assets") from None
    if meta.get("format") != GARMENT_FORMAT or meta.get("version") != GARMENT_VERSION:
        raise AssetValidationError(f"{root / 'garment.json'}: not a version {GARMENT_VERSION} garment", operation="read_assets")
    pinned = np.asarray(meta.get("pinned", []), dtype=np.int64)
    if pinned.size and (pinned.min() < 0 or pinned.max() >= canonical.vertex_count):
        raise AssetValidationError(f"{root}: pinned index out of range", operation="read_assets")
    k = body.joint_count
    train = [read_poses(p, k) for p in sorted((root / "poses").glob("train_*.bpos"))]
    heldout = [read_poses(p, k) for p in sorted((root / "poses").glob("heldout_*.bpos"))]
    return AssetBundle(
        kind=str(meta.get("kind", "")),
        body=body,
        template=template,
        canonical=canonical,
        pinned=pinned,
        train=train,
        heldout=heldout,
    )
