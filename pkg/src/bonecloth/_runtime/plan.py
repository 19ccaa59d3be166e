# Area: Runtime
# PRD: docs/prd-bonecloth.md
"""
bonecloth._runtime.plan — Preallocated pose-deformer frame kernel
=================================================================

The same map as ``PoseDeformer`` evaluated with plain numpy into buffers
allocated once: every ufunc, matmul and einsum writes through ``out=``,
the sparse texel operators are flattened to fixed-width gather tables and
the convolution patches are copied from precomputed sliding-window views.

Stages (timed separately)::

    bones_lbs    skeleton → bones LBS for the newest pose
    bone_net     FiLM-modulated Bone-Net → (B, 9) corrections
    garment_lbs  bones → garment LBS with Ŵ
    rasterize    X_UV = [P_UV | F_UV | φ]
    conv_mlp     3×3 convolutions + 1×1 head, occupancy-masked
    sample       δp gathered per vertex and added to Stage 1
"""

from __future__ import annotations

import time
from typing import List, Tuple

import numpy as np
import scipy.sparse as sp
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import DegenerateInputError, ShapeMismatchError
from .._kinematics.rotation6d import DEGENERATE_EPS
from .._kinematics.skeleton import rest_world
from .._networks.model import GarmentModel
from .cache import IdentityCache

STAGES = ("bones_lbs", "bone_net", "garment_lbs", "rasterize", "conv_mlp", "sample")

F32 = np.float32


def padded_rows(matrix: sp.spmatrix) -> Tuple[np.ndarray, np.ndarray]:
    """CSR rows as (N, m) index and weight tables; padding slots have weight 0."""
    csr = sp.csr_matrix(matrix)
    counts = np.diff(csr.indptr)
    width = max(int(counts.max(initial=0)), 1)
    index = np.zeros((csr.shape[0], width), dtype=np.int64)
    weight = np.zeros((csr.shape[0], width), dtype=F32)
    rows = np.repeat(np.arange(csr.shape[0]), counts)
    slots = np.arange(csr.nnz) - np.repeat(csr.indptr[:-1], counts)
    index[rows, slots] = csr.indices
    weight[rows, slots] = csr.data
    return index, weight


def _f32(array) -> np.ndarray:
    out = np.array(array, dtype=F32)
    out.setflags(write=False)
    return out


class _GramSchmidt:
    """In-place 6D → column-major (N, 9) decoding into fixed buffers."""

    def __init__(self, count: int, dtype, what: str):
        self.what = what
        self.flat = np.empty((count, 9), dtype=dtype)
        self.columns = [np.empty((count, 3), dtype=dtype) for _ in range(3)]
        self.norm = np.empty(count, dtype=dtype)
        self.scratch = np.empty(count, dtype=dtype)
        self.scratch3 = np.empty((count, 3), dtype=dtype)

    def _check(self, reason: str) -> None:
        # NaN norms fail the comparison too
        if not self.norm.min() >= DEGENERATE_EPS:
            raise DegenerateInputError("step_frame", f"{reason} in 6D rotation of {self.what}", index=int(self.norm.argmin()))

    def __call__(self, r6: np.ndarray) -> np.ndarray:
        a, b = r6[:, :3], r6[:, 3:]
        c1, c2, c3 = self.columns
        np.einsum("bi,bi->b", a, a, out=self.norm)
        np.sqrt(self.norm, out=self.norm)
        self._check("zero first column")
        np.divide(a, self.norm[:, None], out=c1)
        np.einsum("bi,bi->b", b, c1, out=self.scratch)
        np.multiply(c1, self.scratch[:, None], out=self.scratch3)
        np.subtract(b, self.scratch3, out=c2)
        np.einsum("bi,bi->b", c2, c2, out=self.norm)
        np.sqrt(self.norm, out=self.norm)
        self._check("collinear columns")
        np.divide(c2, self.norm[:, None], out=c2)
        for i, (j, l) in enumerate(((1, 2), (2, 0), (0, 1))):
            np.multiply(c1[:, j], c2[:, l], out=c3[:, i])
            np.multiply(c1[:, l], c2[:, j], out=self.scratch)
            c3[:, i] -= self.scratch
        for column, start in zip(self.columns, (0, 3, 6)):
            np.copyto(self.flat[:, start:start + 3], column)
        return self.flat


class FramePlan:
    """One session's worth of parameters and scratch buffers."""

    def __init__(self, model: GarmentModel, cache: IdentityCache):
        if model.bone_count != cache.bone_count:
            raise ShapeMismatchError("frame_plan", [(model.bone_count,), (cache.bone_count,)], "matching bone counts")
        rig, texmap = cache.rig, cache.texmap
        deformer = model.deformer
        self.skeleton = cache.skeleton
        self.joint_count = k = cache.skeleton.joint_count
        self.bone_count = b = rig.bone_count
        self.vertex_count = v = rig.vertex_count
        self.use_conv_mlp = deformer.use_conv_mlp
        h, w = texmap.height, texmap.width
        hw = h * w

        # constants
        self.rest_inverse = np.linalg.inv(rest_world(cache.skeleton))
        self.smpl_weights = rig.smpl_weights
        self.bone_rest = rig.positions
        self.bone_rest32 = _f32(rig.positions)
        self.canonical = _f32(rig.canonical)
        self.weights = cache.weights
        film = cache.film(model)
        self.bone_layers = [
            (_f32(layer.weight.data), _f32(layer.bias.data), _f32(g.data), _f32(bt.data))
            for layer, g, bt in zip(deformer.bone_net.layers, film.gammas, film.betas)
        ]
        self.bone_head = (_f32(deformer.bone_net.head.weight.data), _f32(deformer.bone_net.head.bias.data))
        proj = deformer.pose_embed.proj
        self.max_joints = deformer.pose_embed.max_joints
        if k > self.max_joints:
            raise ShapeMismatchError("frame_plan", [(k,), (self.max_joints,)], "joint count within max_joints")
        self.pose_proj = (_f32(proj.weight.data), _f32(proj.bias.data))
        self.convs = [
            (_f32(c.weight.data.reshape(-1, c.weight.shape[3])), _f32(c.bias.data))
            for c in deformer.conv_mlp.convs
        ]
        head = deformer.conv_mlp.head
        self.conv_head = (_f32(head.weight.data.reshape(-1, 3)), _f32(head.bias.data))
        self.raster_index, self.raster_weight = padded_rows(texmap.raster)
        self.sample_index, self.sample_weight = padded_rows(texmap.sample)
        self.mask = _f32(texmap.occupied_flat[:, None])

        # buffers: kinematics in float64, networks in float32
        self.joint_rotations = _GramSchmidt(k, np.float64, "joint")
        self.parents = [int(p) for p in cache.skeleton.parents]
        self.rest_rotations = cache.skeleton.rest_rotations
        self.local = np.zeros((k, 4, 4))
        self.local[:, :3, 3] = cache.skeleton.rest_translations
        self.local[:, 3, 3] = 1.0
        self.world = np.empty((k, 4, 4))
        self.local_rows = list(self.local)
        self.world_rows = list(self.world)
        self.transforms = np.empty((k, 4, 4))
        self.blended = np.empty((b, 16))
        self.base_6d = np.empty((b, 6), dtype=F32)
        self.velocity = np.empty((2, b, 3))
        self.features = np.zeros((b, 3, 6), dtype=F32)
        self.hidden = [np.empty((1, layer[0].shape[1]), dtype=F32) for layer in self.bone_layers]
        self.corrections = np.empty((1, b * 9), dtype=F32)
        self.r6 = np.empty((b, 6), dtype=F32)
        self.bone_rotations = _GramSchmidt(b, F32, "bone")
        self.rot_flat = self.bone_rotations.flat
        self.q_hat = np.empty((b, 3), dtype=F32)
        self.offsets = np.empty((b, 3), dtype=F32)
        self.blended_rot = np.empty((v, 9), dtype=F32)
        self.stage1 = np.empty((v, 3), dtype=F32)
        self.scratch_v3 = np.empty((v, 3), dtype=F32)
        self.centroid = np.empty(3)
        self.centered = np.empty((v, 3), dtype=F32)
        self.raster_gather = np.empty(self.raster_index.shape + (3,), dtype=F32)
        self.p_uv = np.empty((hw, 3), dtype=F32)
        self.pose_padded = np.zeros((3, self.max_joints, 6), dtype=F32)
        self.phi = np.empty((1, self.pose_proj[0].shape[1]), dtype=F32)
        d_f = cache.uv_features.shape[-1]
        self.x_uv = np.empty((hw, 3 + d_f + self.phi.shape[1]), dtype=F32)
        self.x_uv[:, 3:3 + d_f] = cache.uv_features.reshape(hw, d_f)
        self.conv_padded: List[np.ndarray] = []
        self.conv_windows: List[np.ndarray] = []
        self.conv_patches: List[np.ndarray] = []
        self.conv_out: List[np.ndarray] = []
        c_in = self.x_uv.shape[1]
        for wmat, _ in self.convs:
            padded = np.zeros((h + 2, w + 2, c_in), dtype=F32)
            self.conv_padded.append(padded)
            self.conv_windows.append(sliding_window_view(padded, (3, 3), axis=(0, 1)).transpose(0, 1, 3, 4, 2))
            self.conv_patches.append(np.empty((hw, 9 * c_in), dtype=F32))
            self.conv_out.append(np.empty((hw, wmat.shape[1]), dtype=F32))
            c_in = wmat.shape[1]
        self.grid = np.empty((hw, 3), dtype=F32)
        self.sample_gather = np.empty(self.sample_index.shape + (3,), dtype=F32)
        self.delta = np.empty((v, 3), dtype=F32)
        self.out = np.empty((v, 3), dtype=F32)
        self.stage_ns = np.zeros(len(STAGES), dtype=np.int64)
        self.shape = (h, w)

    # ── stages ────────────────────────────────────────────────

    def _forward_kinematics(self, pose: np.ndarray) -> None:
        """World transforms of a (K, 6) pose into self.world."""
        flat = self.joint_rotations(pose)
        k = self.joint_count
        np.matmul(self.rest_rotations, flat.reshape(k, 3, 3).transpose(0, 2, 1), out=self.local[:, :3, :3])
        for joint, parent in enumerate(self.parents):
            if parent < 0:
                np.copyto(self.world_rows[joint], self.local_rows[joint])
            else:
                np.matmul(self.world_rows[parent], self.local_rows[joint], out=self.world_rows[joint])

    def bones_lbs(self, pose: np.ndarray, bones_out: np.ndarray) -> None:
        """Posed bone positions and the blended bone base rotations (6D)."""
        self._forward_kinematics(pose)
        np.matmul(self.world, self.rest_inverse, out=self.transforms)
        np.matmul(self.smpl_weights, self.transforms.reshape(self.joint_count, 16), out=self.blended)
        blended = self.blended.reshape(-1, 4, 4)
        np.einsum("bij,bj->bi", blended[:, :3, :3], self.bone_rest, out=bones_out)
        bones_out += blended[:, :3, 3]
        np.copyto(self.base_6d[:, :3], blended[:, :3, 0], casting="same_kind")
        np.copyto(self.base_6d[:, 3:], blended[:, :3, 1], casting="same_kind")

    def bone_net(self, bone_window: np.ndarray) -> None:
        np.copyto(self.features[:, :, :3], bone_window.transpose(1, 0, 2), casting="same_kind")
        np.subtract(bone_window[1:], bone_window[:-1], out=self.velocity)
        np.copyto(self.features[:, 1:, 3:], self.velocity.transpose(1, 0, 2), casting="same_kind")
        h = self.features.reshape(1, -1)
        for (weight, bias, gamma, beta), buf in zip(self.bone_layers, self.hidden):
            np.matmul(h, weight, out=buf)
            buf += bias
            buf *= gamma
            buf += beta
            np.maximum(buf, 0.0, out=buf)
            h = buf
        np.matmul(h, self.bone_head[0], out=self.corrections)
        self.corrections += self.bone_head[1]

    def garment_lbs(self, bones: np.ndarray) -> None:
        corrections = self.corrections.reshape(self.bone_count, 9)
        np.add(self.base_6d, corrections[:, :6], out=self.r6)
        self.bone_rotations(self.r6)
        np.add(bones, corrections[:, 6:], out=self.q_hat, casting="same_kind")
        # Σ_b ŵ R̂_b p_v^c
        np.matmul(self.weights, self.rot_flat, out=self.blended_rot)
        np.einsum("vji,vj->vi", self.blended_rot.reshape(-1, 3, 3), self.canonical, out=self.stage1)
        # Σ_b ŵ (R̂_b p_b^c − q̂_b)
        np.einsum("bji,bj->bi", self.rot_flat.reshape(-1, 3, 3), self.bone_rest32, out=self.offsets)
        self.offsets -= self.q_hat
        np.matmul(self.weights, self.offsets, out=self.scratch_v3)
        self.stage1 -= self.scratch_v3

    def rasterize(self, bones: np.ndarray, pose_window: np.ndarray) -> None:
        np.mean(bones, axis=0, out=self.centroid)
        np.subtract(self.stage1, self.centroid, out=self.centered, casting="same_kind")
        np.take(self.centered, self.raster_index, axis=0, out=self.raster_gather, mode="clip")
        np.einsum("nm,nmc->nc", self.raster_weight, self.raster_gather, out=self.p_uv)
        np.copyto(self.x_uv[:, :3], self.p_uv)
        np.copyto(self.pose_padded[:, : self.joint_count], pose_window, casting="same_kind")
        np.matmul(self.pose_padded.reshape(1, -1), self.pose_proj[0], out=self.phi)
        self.phi += self.pose_proj[1]
        np.copyto(self.x_uv[:, self.x_uv.shape[1] - self.phi.shape[1]:], self.phi)

    def conv_mlp(self) -> None:
        h, w = self.shape
        current = self.x_uv
        for (wmat, bias), padded, windows, patches, out in zip(
            self.convs, self.conv_padded, self.conv_windows, self.conv_patches, self.conv_out
        ):
            np.copyto(padded[1:-1, 1:-1], current.reshape(h, w, -1))
            np.copyto(patches.reshape(windows.shape), windows)
            np.matmul(patches, wmat, out=out)
            out += bias
            np.maximum(out, 0.0, out=out)
            current = out
        np.matmul(current, self.conv_head[0], out=self.grid)
        self.grid += self.conv_head[1]
        self.grid *= self.mask

    def sample(self) -> None:
        np.take(self.grid, self.sample_index, axis=0, out=self.sample_gather, mode="clip")
        np.einsum("nm,nmc->nc", self.sample_weight, self.sample_gather, out=self.delta)
        np.add(self.stage1, self.delta, out=self.out)

    # ── frame ─────────────────────────────────────────────────

    def run(self, bone_window: np.ndarray, pose_window: np.ndarray) -> np.ndarray:
        """
        Stages after bones_lbs for a filled (3, B, 3) bone window and
        (3, K, 6) pose window. Returns the output buffer, which the next
        call overwrites.
        """
        ns = self.stage_ns
        t0 = time.perf_counter_ns()
        self.bone_net(bone_window)
        t1 = time.perf_counter_ns()
        self.garment_lbs(bone_window[-1])
        t2 = time.perf_counter_ns()
        ns[1], ns[2] = t1 - t0, t2 - t1
        if not self.use_conv_mlp:
            np.copyto(self.out, self.stage1)
            ns[3:] = 0
            return self.out
        self.rasterize(bone_window[-1], pose_window)
        t3 = time.perf_counter_ns()
        self.conv_mlp()
        t4 = time.perf_counter_ns()
        self.sample()
        t5 = time.perf_counter_ns()
        ns[3], ns[4], ns[5] = t3 - t2, t4 - t3, t5 - t4
        return self.out
