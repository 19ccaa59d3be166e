# Area: Networks
# PRD: docs/prd-bonecloth.md
"""
bonecloth._networks.encoder — Shared message-passing encoder
===========================================================

Encode-process blocks in the MeshGraphNet layout:

    h = MLP_v(node features),  e = MLP_e(edge features)
    repeat L times:
        e ← e + MLP([e, h_sender, h_receiver])
        h ← h + MLP([h, Σ incoming e])

Every MLP is two layers with a LayerNorm on its output. The same
parameters (``encoder.*``) serve the canonical identity graph and the
per-frame dynamics graphs.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ShapeMismatchError
from .._diffcore import ops
from .._diffcore.params import ParamStore
from .._diffcore.tape import Tensor
from .graph import EDGE_FEATURES, NODE_FEATURES, GraphInputs
from .layers import MLP


@dataclass(frozen=True, eq=False)
class EncodedGraph:
    nodes: Tensor
    edges: Tensor


class GraphEncoder:
    def __init__(self, store: ParamStore, latent: int, rounds: int, prefix: str = "encoder"):
        self.latent = latent
        self.rounds = rounds
        self.node_encoder = MLP(store, f"{prefix}.node", (NODE_FEATURES, latent, latent), layer_norm=True)
        self.edge_encoder = MLP(store, f"{prefix}.edge", (EDGE_FEATURES, latent, latent), layer_norm=True)
        self.edge_updates = [
            MLP(store, f"{prefix}.round{i}.edge", (3 * latent, latent, latent), layer_norm=True) for i in range(rounds)
        ]
        self.node_updates = [
            MLP(store, f"{prefix}.round{i}.node", (2 * latent, latent, latent), layer_norm=True) for i in range(rounds)
        ]

    def __call__(self, graph: GraphInputs) -> EncodedGraph:
        topology = graph.topology
        if graph.nodes.shape != (topology.node_count, NODE_FEATURES):
            raise ShapeMismatchError("graph_encoder", [graph.nodes.shape], f"({topology.node_count}, {NODE_FEATURES})")
        if graph.edges.shape != (len(topology.senders), EDGE_FEATURES):
            raise ShapeMismatchError("graph_encoder", [graph.edges.shape], f"({len(topology.senders)}, {EDGE_FEATURES})")
        h = self.node_encoder(graph.nodes)
        e = self.edge_encoder(graph.edges)
        for edge_mlp, node_mlp in zip(self.edge_updates, self.node_updates):
            message = ops.concat(
                [e, ops.gather_rows(h, topology.senders), ops.gather_rows(h, topology.receivers)], axis=-1
            )
            e = ops.add(e, edge_mlp(message))
            incoming = ops.scatter_add_rows(e, topology.receivers, topology.node_count)
            h = ops.add(h, node_mlp(ops.concat([h, incoming], axis=-1)))
        return EncodedGraph(nodes=h, edges=e)
