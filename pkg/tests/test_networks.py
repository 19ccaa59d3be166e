# Area: Networks Tests
# PRD: docs/prd-bonecloth.md
"""Tests for the graphs, the learned components and their parameter layout."""

from dataclasses import replace

import numpy as np
import pytest

from bonecloth.errors import ShapeMismatchError
from bonecloth._diffcore import gradcheck, ops
from bonecloth._diffcore.tape import Tensor
from bonecloth._kinematics.rig import correct_weights, correct_weights_tensor, skin_garment
from bonecloth._networks import (
    IDENTITY_PREFIXES,
    KIND_BODY,
    KIND_PINNED,
    STUDENT_PREFIXES,
    TEACHER_PREFIXES,
    ConvMLP,
    GarmentModel,
    GraphEncoder,
    GraphInputs,
    GraphScales,
    GraphTopology,
    bone_inputs,
    bone_net_forward,
    bone_window,
    build_topology,
    conv_mlp_forward,
    dynamic_graph,
    edge_features,
    knn_body_links,
    node_features,
    pad_pose_window,
    proximity_links,
)
from bonecloth._networks.graph import EDGE_FEATURES, NODE_FEATURES
from bonecloth._networks.layers import MLP
from bonecloth._diffcore.params import ParamStore
from bonecloth._training.identity import prepare_identity


@pytest.fixture(scope="module")
def identity(swatch_bundle, tiny_config):
    return prepare_identity("swatch", swatch_bundle, tiny_config)


@pytest.fixture(scope="module")
def model(tiny_config):
    return GarmentModel(tiny_config.networks, bone_count=6, seed=tiny_config.seed)


class TestParameterLayout:
    """Naming, grouping and deterministic initialization."""

    def test_groups_partition_every_parameter(self, model):
        names = set(model.params.names())
        teacher = set(model.group(TEACHER_PREFIXES))
        identity = set(model.group(IDENTITY_PREFIXES))
        student = set(model.group(STUDENT_PREFIXES))
        assert teacher | identity | student == names
        assert not (teacher & identity or teacher & student or identity & student)

    def test_same_seed_same_weights(self, tiny_config, model):
        other = GarmentModel(tiny_config.networks, bone_count=6, seed=tiny_config.seed)
        for name, value in model.state_dict().items():
            assert np.array_equal(other.state_dict()[name], value)

    def test_different_seed_differs(self, tiny_config, model):
        other = GarmentModel(tiny_config.networks, bone_count=6, seed=tiny_config.seed + 1)
        assert not np.array_equal(other.params["encoder.node.0.weight"].data, model.params["encoder.node.0.weight"].data)

    @pytest.mark.parametrize("name", [
        "identity.weights.weight",
        "identity.features.weight",
        "bone_net.head.weight",
        "conv_mlp.head.weight",
        "modulator.gamma.weight",
        "modulator.beta.bias",
    ])
    def test_zero_initialized_heads(self, model, name):
        assert not model.params[name].data.any()

    def test_modulator_starts_as_identity(self, model):
        film = model.film(Tensor(np.random.default_rng(0).normal(size=(1, 4))))
        assert all(np.allclose(g.data, 1.0) for g in film.gammas)
        assert all(np.allclose(b.data, 0.0) for b in film.betas)
        assert film.widths == [16, 16]

    def test_save_then_load_infers_bone_count(self, tmp_path, tiny_config, model):
        path = tmp_path / "model.bnck"
        model.save(path)
        loaded = GarmentModel.load(path, tiny_config.networks, seed=99)
        assert loaded.bone_count == 6
        for name, value in model.state_dict().items():
            assert np.array_equal(loaded.state_dict()[name], value)

    def test_load_wrong_width_rejected(self, tmp_path, tiny_config, model):
        path = tmp_path / "model.bnck"
        model.save(path)
        wider = tiny_config.networks.model_copy(update={"latent_dim": 12})
        with pytest.raises(ShapeMismatchError):
            GarmentModel.load(path, wider)


class TestGraphs:
    """Topology, body links and feature invariants."""

    def test_knn_links(self):
        cloth = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        body = np.array([[0.0, 0.1, 0.0], [1.0, 0.1, 0.0], [5.0, 0.0, 0.0]])
        links = knn_body_links(cloth, body, 2)
        assert links.tolist() == [[0, 0], [0, 1], [1, 1], [1, 0]]

    def test_knn_clamped_to_body_size(self):
        links = knn_body_links(np.zeros((3, 3)), np.ones((1, 3)), 4)
        assert links.shape == (3, 2)

    def test_proximity_links(self):
        cloth = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        body = np.array([[0.0, 0.01, 0.0], [0.0, -0.02, 0.0], [3.0, 0.0, 0.0]])
        assert proximity_links(cloth, body, 0.03).tolist() == [[0, 0], [0, 1]]

    def test_topology_is_bidirectional(self):
        scales = GraphScales(length=1.0, mass=1.0, dt=0.1)
        cloth_rest = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        body_rest = np.array([[0.0, 1.0, 0.0], [1.0, 1.0, 0.0]])
        topo = build_topology(np.array([[0, 1]]), np.array([[0, 1]]), np.array([[0, 1]]), cloth_rest, body_rest, scales)
        assert topo.node_count == 4 and topo.undirected_count == 3
        assert topo.senders.tolist() == [0, 2, 0, 1, 3, 3]
        assert topo.receivers.tolist() == [1, 3, 3, 0, 2, 0]
        # contact edges carry no rest geometry
        assert np.allclose(topo.rest_features[[2, 5]], 0.0)
        assert topo.kind_features[:, 1].tolist() == [0, 0, 1, 0, 0, 1]

    def test_edge_features_translation_invariant(self, identity):
        topo = identity.graph.topology
        cloth = identity.bundle.canonical.vertices
        body = identity.bundle.body.mesh.vertices
        shift = np.array([0.3, -1.2, 2.0])
        before = edge_features(topo, Tensor(cloth), body, identity.scales).data
        after = edge_features(topo, Tensor(cloth + shift), body + shift, identity.scales).data
        assert np.allclose(before, after, atol=1e-4)

    def test_node_features_velocity_shape_checked(self, identity):
        nc = identity.graph.topology.cloth_count
        nb = identity.graph.topology.body_count
        with pytest.raises(ShapeMismatchError):
            node_features(
                Tensor(np.zeros((nc + 1, 3))), np.zeros((nc, 3)), identity.kinds, identity.constants.masses,
                np.zeros((nb, 3)), np.zeros((nb, 3)), identity.scales,
            )
        with pytest.raises(ShapeMismatchError):
            node_features(
                Tensor(np.zeros((nc, 3))), np.zeros((nc, 3)), identity.kinds, identity.constants.masses,
                np.zeros((nb, 3)), np.zeros((nb + 2, 3)), identity.scales,
            )

    def test_node_kinds(self, identity):
        nodes = identity.graph.nodes.data
        cloth = identity.graph.topology.cloth_count
        pinned = identity.bundle.pinned
        assert np.all(nodes[pinned, 6 + KIND_PINNED] == 1.0)
        assert np.all(nodes[cloth:, 6 + KIND_BODY] == 1.0)
        # canonical graph is at rest
        assert not nodes[:, :3].any()


class TestIdentityEncoder:
    """One pass over the canonical graph."""

    def test_output_shapes_and_zero_heads(self, model, identity, tiny_config):
        out = model.identity(identity.graph, identity.texmap)
        v = identity.vertex_count
        assert out.z.shape == (1, tiny_config.networks.shape_dim)
        assert out.delta_weights.shape == (v, 6)
        assert out.uv_features.shape == (8 * 8, tiny_config.networks.feature_dim)
        assert not out.delta_weights.data.any()
        assert not out.uv_features.data.any()

    @pytest.mark.parametrize("seed", range(5))
    def test_graph_encoder_is_permutation_equivariant(self, seed):
        rng = np.random.default_rng(seed)
        n, e = 9, 14
        senders, receivers = rng.integers(0, n, size=e), rng.integers(0, n, size=e)
        nodes, edges = rng.normal(size=(n, NODE_FEATURES)), rng.normal(size=(e, EDGE_FEATURES))
        encoder = GraphEncoder(ParamStore(np.random.default_rng(100 + seed)), latent=8, rounds=2)

        def encode(order, s, r):
            topology = GraphTopology(
                cloth_count=n, body_count=0, senders=s, receivers=r,
                rest_features=np.zeros((e, 4)), kind_features=np.zeros((e, 2)), undirected_count=e,
            )
            return encoder(GraphInputs(topology, Tensor(nodes[order]), Tensor(edges)))

        perm = rng.permutation(n)
        inverse = np.argsort(perm)
        base = encode(np.arange(n), senders, receivers)
        permuted = encode(perm, inverse[senders], inverse[receivers])
        assert np.allclose(permuted.nodes.data, base.nodes.data[perm], atol=1e-4)
        assert np.allclose(permuted.edges.data, base.edges.data, atol=1e-4)


class TestDynamics:
    """Zero-initialized acceleration decoder."""

    def test_untrained_predicts_zero(self, model, identity):
        accel = model.dynamics([identity.graph] * 3, identity.scales)
        assert accel.shape == (identity.vertex_count, 3)
        assert not accel.data.any()

    def test_history_length_checked(self, model, identity):
        with pytest.raises(ShapeMismatchError):
            model.dynamics([identity.graph] * 2, identity.scales)

    def test_accelerations_translation_invariant(self, trained_like, identity, rng):
        bundle = identity.bundle
        cloth = bundle.canonical.vertices + rng.normal(scale=0.01, size=bundle.canonical.vertices.shape)
        body = bundle.body.mesh.vertices
        velocity = rng.normal(scale=0.1, size=cloth.shape)
        links = proximity_links(cloth, body, 0.05)

        def accelerations(shift):
            graph = dynamic_graph(
                Tensor(cloth + shift), Tensor(velocity), velocity, bundle.canonical.vertices,
                bundle.canonical.edges, identity.kinds, identity.constants.masses,
                body + shift, np.zeros_like(body), np.zeros_like(body), body, bundle.body.mesh.edges,
                0.05, identity.scales, links=links,
            )
            return trained_like.dynamics([graph] * 3, identity.scales).data

        before = accelerations(np.zeros(3))
        assert np.abs(before).max() > 0.0
        after = accelerations(np.array([0.4, -1.5, 2.5]))
        assert np.allclose(after, before, atol=1e-3 * np.abs(before).max())


class TestBoneNetInputs:
    """Window features and pose padding."""

    def test_oldest_velocity_is_zero(self):
        window = np.stack([np.zeros((2, 3)), np.ones((2, 3)), np.full((2, 3), 3.0)])
        features = bone_inputs(window).reshape(2, 3, 6)
        assert np.allclose(features[0, 0], [0, 0, 0, 0, 0, 0])
        assert np.allclose(features[0, 1], [1, 1, 1, 1, 1, 1])
        assert np.allclose(features[1, 2], [3, 3, 3, 2, 2, 2])

    def test_window_shape_checked(self):
        with pytest.raises(ShapeMismatchError):
            bone_inputs(np.zeros((2, 4, 3)))

    def test_pad_pose_window(self):
        padded = pad_pose_window(np.ones((3, 2, 6)), 4)
        assert padded.shape == (1, 72)
        assert padded.reshape(3, 4, 6)[:, 2:].sum() == 0.0

    def test_too_many_joints(self):
        with pytest.raises(ShapeMismatchError):
            pad_pose_window(np.ones((3, 5, 6)), 4)


class TestPoseDeformer:
    """The untrained deformer is plain bone skinning."""

    def test_untrained_matches_skinning(self, model, identity):
        frames = identity.train[0]
        t = 6
        out = model.identity(identity.graph, identity.texmap)
        weights = correct_weights_tensor(identity.rig.init_weights, out.delta_weights)
        result = model.deformer(
            identity.rig,
            weights,
            model.film(out.z),
            out.uv_features,
            identity.texmap,
            frames.transforms_window(t),
            frames.pose_window(t),
        )
        expected = skin_garment(
            identity.rig,
            correct_weights(identity.rig.init_weights, np.zeros((identity.vertex_count, 6))),
            frames.transforms[t],
        )
        assert np.allclose(result.stage1.data, expected, atol=1e-5)
        assert np.allclose(result.positions.data, expected, atol=1e-5)
        assert not result.corrections.data.any()

    def test_conv_mlp_disabled_returns_stage1(self, tiny_config, identity):
        plain = GarmentModel(tiny_config.networks.model_copy(update={"use_conv_mlp": False}), 6, seed=1)
        frames = identity.train[0]
        out = plain.identity(identity.graph, identity.texmap)
        weights = correct_weights_tensor(identity.rig.init_weights, out.delta_weights)
        result = plain.deformer(
            identity.rig, weights, plain.film(out.z), out.uv_features, identity.texmap,
            frames.transforms_window(3), frames.pose_window(3),
        )
        assert result.positions is result.stage1

    def test_transform_window_shape_checked(self, model, identity):
        out = model.identity(identity.graph, identity.texmap)
        weights = correct_weights_tensor(identity.rig.init_weights, out.delta_weights)
        with pytest.raises(ShapeMismatchError):
            model.deformer.stage1(identity.rig, weights, model.film(out.z), np.tile(np.eye(4), (2, 1, 1, 1)))

    def test_stages_route_through_forward_functions(self, trained_like, identity):
        frames = identity.train[0]
        t = 5
        deformer = trained_like.deformer
        out = trained_like.identity(identity.graph, identity.texmap)
        film = trained_like.film(out.z)
        weights = correct_weights_tensor(identity.rig.init_weights, out.delta_weights)
        result = deformer(
            identity.rig, weights, film, out.uv_features, identity.texmap,
            frames.transforms_window(t), frames.pose_window(t),
        )
        bones = bone_window(identity.rig, frames.transforms_window(t))
        assert np.allclose(result.corrections.data, bone_net_forward(deformer.bone_net, bones, film).data)
        x = deformer.uv_input(result.stage1, bones[-1], out.uv_features, frames.pose_window(t), identity.texmap)
        refinement = conv_mlp_forward(deformer.conv_mlp, x, identity.texmap).data
        assert np.abs(refinement).max() > 0.0
        assert np.allclose(result.positions.data - result.stage1.data, refinement, atol=1e-5)


class TestConvMLP:
    """Occupancy masking and the local receptive field."""

    LAYERS = 2

    @pytest.fixture(scope="class")
    def net(self):
        store = ParamStore(np.random.default_rng(11))
        net = ConvMLP(store, in_channels=3, channels=4, layers=self.LAYERS)
        net.head.weight.data = np.random.default_rng(12).normal(size=net.head.weight.shape).astype(net.head.weight.data.dtype)
        return net

    @pytest.fixture(scope="class")
    def texmap(self, identity):
        size = 16
        return replace(identity.texmap, height=size, width=size, texel_face=np.zeros(size * size, dtype=np.int64))

    def test_unoccupied_texels_are_zero(self, net, texmap, rng):
        holes = rng.random(texmap.height * texmap.width) < 0.3
        masked = replace(texmap, texel_face=np.where(holes, -1, 0))
        grid = net(Tensor(rng.normal(size=(16, 16, 3))), masked).data.reshape(-1, 3)
        assert not grid[holes].any()
        assert np.abs(grid[~holes]).max() > 0.0

    def test_impulse_stays_within_receptive_field(self, net, texmap, rng):
        x = rng.normal(size=(16, 16, 3))
        bumped = x.copy()
        bumped[2, 3] += 5.0
        change = np.abs(net(Tensor(bumped), texmap).data - net(Tensor(x), texmap).data).max(axis=-1)
        rows, cols = np.indices(change.shape)
        distance = np.maximum(np.abs(rows - 2), np.abs(cols - 3))
        assert change[distance > 3 * self.LAYERS].max() < 1e-9
        assert change[distance <= self.LAYERS].max() > 0.0


class TestLayers:
    """Dense layers differentiate correctly."""

    def test_normalized_linear_gradient(self, rng):
        store = ParamStore(np.random.default_rng(0))
        mlp = MLP(store, "head", (3, 4), layer_norm=True)
        x = rng.normal(size=(4, 3))
        assert gradcheck(lambda t: ops.sum(ops.square(mlp(t))), [x]) < 1e-3
