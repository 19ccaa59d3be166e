# Area: Assets
# PRD: docs/prd-bonecloth.md
"""
bonecloth._assets.motions — Scripted pose sequences
===================================================

Scripts:
    swing          the primary channel of the rig only
    walk           every channel, each with its own phase
    stop-and-hold  walk for the first half, then hold the pose

Each channel is ``(joint, axis, amplitude, phase)``; a joint's local
rotation is the rotation vector summed over its channels. Amplitudes
ramp in over the first frames, so frame 0 is always the rest pose.
Per-sequence frequency, amplitude scale and phase come from the
``poses`` random stream.
"""

from __future__ import annotations

from typing import Dict, List, Literal, Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from .._kinematics.poses import PoseSequence
from .._kinematics.rotation6d import encode_6d
from .._shared.rng import stream

Script = Literal["swing", "walk", "stop-and-hold"]
SCRIPTS: Tuple[Script, ...] = ("swing", "walk", "stop-and-hold")

RAMP_FRAMES = 10
HELDOUT_OFFSET = 1000

_AXES = {"x": np.array([1.0, 0.0, 0.0]), "y": np.array([0.0, 1.0, 0.0]), "z": np.array([0.0, 0.0, 1.0])}

Channel = Tuple[int, str, float, float]

_LEGS: List[Channel] = [
    (2, "x", 0.45, 0.0),
    (4, "x", 0.45, 0.5),
    (3, "x", 0.35, 0.25),
    (5, "x", 0.35, 0.75),
    (0, "y", 0.10, 0.0),
]

CHANNELS: Dict[str, List[Channel]] = {
    "hanging-swatch": [(0, "z", 0.35, 0.0), (0, "x", 0.25, 0.25)],
    "swing-arm": [(1, "z", 0.6, 0.0), (2, "y", 0.5, 0.25), (0, "y", 0.15, 0.5)],
    "skirt-tube": _LEGS,
    "capsule-biped": _LEGS + [(6, "x", 0.35, 0.5), (8, "x", 0.35, 0.0)],
}


def _smoothstep(x: float) -> float:
    x = min(max(x, 0.0), 1.0)
    return x * x * (3 - 2 * x)


def scripted_poses(
    kind: str,
    joint_count: int,
    script: Script,
    frames: int,
    dt: float,
    rng: np.random.Generator,
) -> PoseSequence:
    channels = CHANNELS[kind]
    if script == "swing":
        channels = channels[:1]
    freq = rng.uniform(0.6, 1.2)
    scale = rng.uniform(0.7, 1.1)
    phase0 = rng.uniform(0.0, 2 * np.pi)
    hold_from = frames // 2 if script == "stop-and-hold" else frames

    poses = np.empty((frames, joint_count, 6))
    for t in range(frames):
        clock = min(t, hold_from)
        ramp = _smoothstep(clock / RAMP_FRAMES)
        rotvec = np.zeros((joint_count, 3))
        for joint, axis, amplitude, phase in channels:
            angle = scale * amplitude * ramp * np.sin(2 * np.pi * (freq * clock * dt + phase) + phase0)
            rotvec[joint] += angle * _AXES[axis]
        poses[t] = encode_6d(Rotation.from_rotvec(rotvec).as_matrix())
    return PoseSequence(frames=poses, dt=dt)


def sequence_set(kind: str, joint_count: int, count: int, frames: int, dt: float, seed: int, heldout: bool = False) -> List[PoseSequence]:
    """Scripts cycle swing → walk → stop-and-hold; held-out sets use their own counters."""
    offset = HELDOUT_OFFSET if heldout else 0
    return [
        scripted_poses(kind, joint_count, SCRIPTS[i % len(SCRIPTS)], frames, dt, stream(seed, "poses", offset + i))
        for i in range(count)
    ]
