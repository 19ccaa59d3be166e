# Area: Networks
# PRD: docs/prd-bonecloth.md
"""
bonecloth._networks.graph — Body-garment graphs
===============================================

Nodes are the garment vertices (first ``cloth_count`` rows) followed by
the body vertices. Undirected edges are stored once and expanded to both
directions for message passing.

Node features (10): velocity (3), prescribed next-frame velocity (3,
body and pinned nodes), kind one-hot (cloth, pinned, body), mass (1).
Edge features (10): relative position (3), its length (1), rest relative
position (3), rest length (1), kind one-hot (mesh, contact).

Positions enter only through relative vectors, so features are
invariant to a global translation. Lengths are expressed in units of
the garment's mean rest edge length, velocities as per-frame
displacement in the same unit, masses relative to the mean vertex mass.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from ..errors import ShapeMismatchError
from .._diffcore import ops
from .._diffcore.tape import Tensor

NODE_FEATURES = 10
EDGE_FEATURES = 10

KIND_CLOTH, KIND_PINNED, KIND_BODY = 0, 1, 2


@dataclass(frozen=True, eq=False)
class GraphScales:
    length: float
    mass: float
    dt: float


@dataclass(frozen=True, eq=False)
class GraphTopology:
    """Directed edge arrays plus constant per-edge data."""

    cloth_count: int
    body_count: int
    senders: np.ndarray
    receivers: np.ndarray
    rest_features: np.ndarray
    kind_features: np.ndarray
    undirected_count: int

    @property
    def node_count(self) -> int:
        return self.cloth_count + self.body_count


def build_topology(
    cloth_edges: np.ndarray,
    body_edges: np.ndarray,
    contact_pairs: np.ndarray,
    cloth_rest: np.ndarray,
    body_rest: np.ndarray,
    scales: GraphScales,
) -> GraphTopology:
    """
    contact_pairs: (M, 2) rows of (cloth vertex, body vertex).
    Rest features of contact edges are zero.
    """
    nc, nb = len(cloth_rest), len(body_rest)
    contact_pairs = np.asarray(contact_pairs, dtype=np.int64).reshape(-1, 2)
    undirected = np.concatenate([
        np.asarray(cloth_edges, dtype=np.int64).reshape(-1, 2),
        np.asarray(body_edges, dtype=np.int64).reshape(-1, 2) + nc,
        np.column_stack([contact_pairs[:, 0], contact_pairs[:, 1] + nc]),
    ])
    mesh_count = len(undirected) - len(contact_pairs)
    senders = np.concatenate([undirected[:, 0], undirected[:, 1]])
    receivers = np.concatenate([undirected[:, 1], undirected[:, 0]])
    rest = np.concatenate([cloth_rest, body_rest]) / scales.length
    rest_rel = rest[senders] - rest[receivers]
    is_mesh = np.tile(np.arange(len(undirected)) < mesh_count, 2)
    rest_rel[~is_mesh] = 0.0
    rest_features = np.column_stack([rest_rel, np.linalg.norm(rest_rel, axis=1)])
    kind = np.column_stack([is_mesh, ~is_mesh]).astype(np.float64)
    return GraphTopology(
        cloth_count=nc,
        body_count=nb,
        senders=senders,
        receivers=receivers,
        rest_features=rest_features,
        kind_features=kind,
        undirected_count=len(undirected),
    )


def knn_body_links(cloth_positions: np.ndarray, body_positions: np.ndarray, k: int) -> np.ndarray:
    """Each garment vertex linked to its k nearest body vertices."""
    k = min(k, len(body_positions))
    _, nearest = cKDTree(body_positions).query(cloth_positions, k=k)
    nearest = np.asarray(nearest).reshape(len(cloth_positions), k)
    return np.column_stack([np.repeat(np.arange(len(cloth_positions)), k), nearest.reshape(-1)])


def proximity_links(cloth_positions: np.ndarray, body_positions: np.ndarray, radius: float) -> np.ndarray:
    """All (cloth, body) pairs closer than *radius*, sorted."""
    tree = cKDTree(body_positions)
    found = tree.query_ball_point(cloth_positions, r=radius)
    pairs = [(c, b) for c, hits in enumerate(found) for b in sorted(hits)]
    return np.asarray(pairs, dtype=np.int64).reshape(-1, 2)


def node_features(
    cloth_velocity: Tensor,
    cloth_next_velocity: np.ndarray,
    cloth_kind: np.ndarray,
    cloth_mass: np.ndarray,
    body_velocity: np.ndarray,
    body_next_velocity: np.ndarray,
    scales: GraphScales,
) -> Tensor:
    """(N, 10) features; only cloth velocities carry gradients."""
    unit = scales.dt / scales.length
    nc, nb = len(cloth_kind), len(body_velocity)
    if cloth_velocity.shape != (nc, 3) or np.shape(cloth_next_velocity) != (nc, 3) or len(cloth_mass) != nc:
        raise ShapeMismatchError(
            "node_features",
            [cloth_velocity.shape, np.shape(cloth_next_velocity), np.shape(cloth_mass)],
            f"({nc}, 3) velocities and {nc} masses",
        )
    if np.shape(body_next_velocity) != (nb, 3):
        raise ShapeMismatchError("node_features", [np.shape(body_velocity), np.shape(body_next_velocity)], f"({nb}, 3)")
    cloth_kind_onehot = np.eye(3)[cloth_kind]
    cloth_static = np.column_stack([cloth_next_velocity * unit, cloth_kind_onehot, cloth_mass / scales.mass])
    cloth = ops.concat([ops.scale(cloth_velocity, unit), Tensor(cloth_static)], axis=-1)
    body = np.column_stack([
        body_velocity * unit,
        body_next_velocity * unit,
        np.tile(np.eye(3)[KIND_BODY], (nb, 1)),
        np.zeros((nb, 1)),
    ])
    if nb == 0:
        return cloth
    return ops.concat([cloth, Tensor(body)], axis=0)


def edge_features(
    topology: GraphTopology,
    cloth_positions: Tensor,
    body_positions: np.ndarray,
    scales: GraphScales,
) -> Tensor:
    """(2E, 10) features from current positions."""
    positions = ops.scale(ops.concat([cloth_positions, Tensor(body_positions)], axis=0), 1.0 / scales.length)
    rel = ops.sub(ops.gather_rows(positions, topology.senders), ops.gather_rows(positions, topology.receivers))
    length = ops.reshape(ops.norm(rel, eps=1e-12), (len(topology.senders), 1))
    constant = Tensor(np.column_stack([topology.rest_features, topology.kind_features]))
    return ops.concat([rel, length, constant], axis=-1)


@dataclass(frozen=True, eq=False)
class GraphInputs:
    topology: GraphTopology
    nodes: Tensor
    edges: Tensor


def canonical_graph(
    cloth_rest: np.ndarray,
    cloth_edges: np.ndarray,
    cloth_kind: np.ndarray,
    cloth_mass: np.ndarray,
    body_rest: np.ndarray,
    body_edges: np.ndarray,
    neighbors: int,
    scales: GraphScales,
) -> GraphInputs:
    """Canonical A-pose graph: zero velocities, k nearest body links per garment vertex."""
    links = knn_body_links(cloth_rest, body_rest, neighbors)
    topology = build_topology(cloth_edges, body_edges, links, cloth_rest, body_rest, scales)
    nc, nb = len(cloth_rest), len(body_rest)
    nodes = node_features(
        Tensor(np.zeros((nc, 3))), np.zeros((nc, 3)), cloth_kind, cloth_mass,
        np.zeros((nb, 3)), np.zeros((nb, 3)), scales,
    )
    edges = edge_features(topology, Tensor(cloth_rest), body_rest, scales)
    return GraphInputs(topology, nodes, edges)


def dynamic_graph(
    cloth_positions: Tensor,
    cloth_velocity: Tensor,
    cloth_next_velocity: np.ndarray,
    cloth_rest: np.ndarray,
    cloth_edges: np.ndarray,
    cloth_kind: np.ndarray,
    cloth_mass: np.ndarray,
    body_positions: np.ndarray,
    body_velocity: np.ndarray,
    body_next_velocity: np.ndarray,
    body_rest: np.ndarray,
    body_edges: np.ndarray,
    radius: float,
    scales: GraphScales,
    links: Optional[np.ndarray] = None,
) -> GraphInputs:
    """Per-frame graph; proximity edges are recomputed from current positions."""
    if links is None:
        links = proximity_links(cloth_positions.data.astype(np.float64), body_positions, radius)
    topology = build_topology(cloth_edges, body_edges, links, cloth_rest, body_rest, scales)
    nodes = node_features(
        cloth_velocity, cloth_next_velocity, cloth_kind, cloth_mass,
        body_velocity, body_next_velocity, scales,
    )
    edges = edge_features(topology, cloth_positions, body_positions, scales)
    return GraphInputs(topology, nodes, edges)
