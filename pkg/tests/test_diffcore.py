# Area: Diffcore Tests
# PRD: docs/prd-bonecloth.md
"""Tests for the tape, differentiable ops, parameters, Adam and BNCK checkpoints."""

import numpy as np
import pytest
import scipy.sparse as sp

from bonecloth.errors import FileFormatError, ShapeMismatchError, TapeError
from bonecloth._diffcore import (
    AdamState,
    ParamStore,
    Tape,
    Tensor,
    adam_step,
    backward,
    current_dtype,
    gradcheck,
    load_checkpoint,
    ops,
    precision,
    save_checkpoint,
)


def _weighted(out: Tensor, seed: int = 0) -> Tensor:
    """Scalar readout with distinct weights so every output element matters."""
    weights = np.random.default_rng(seed).uniform(0.5, 1.5, size=out.shape)
    return ops.sum(ops.mul(out, Tensor(weights)))


def _away_from_zero(rng, shape=(4, 3)) -> np.ndarray:
    return rng.uniform(0.3, 1.5, size=shape) * rng.choice([-1.0, 1.0], size=shape)


class TestTape:
    """Recording, scalar backward and gradient accumulation."""

    def test_square_gradient(self):
        with precision("float64"):
            x = Tensor(np.array([1.0, -2.0, 3.0]), requires_grad=True)
            with Tape() as tape:
                y = ops.sum(ops.square(x))
            grads = backward(tape, y)
        assert np.allclose(grads[x], [2.0, -4.0, 6.0])
        assert np.allclose(x.grad, [2.0, -4.0, 6.0])

    def test_non_scalar_output_rejected(self):
        x = Tensor(np.ones(3), requires_grad=True)
        with Tape() as tape:
            y = ops.square(x)
        with pytest.raises(TapeError):
            tape.backward(y)

    def test_consumed_tape_rejected(self):
        x = Tensor(np.ones(3), requires_grad=True)
        with Tape() as tape:
            y = ops.sum(x)
        tape.backward(y)
        assert tape.consumed
        with pytest.raises(TapeError):
            tape.backward(y)

    def test_gradients_accumulate_without_zero_grad(self):
        x = Tensor(np.ones(2), requires_grad=True)
        for _ in range(2):
            with Tape() as tape:
                y = ops.sum(ops.scale(x, 3.0))
            tape.backward(y)
        assert np.allclose(x.grad, [6.0, 6.0])
        x.zero_grad()
        assert x.grad is None

    def test_no_recording_outside_tape(self):
        x = Tensor(np.ones(2), requires_grad=True)
        y = ops.sum(x)
        assert not y.requires_grad

    def test_detach_blocks_gradient(self):
        x = Tensor(np.ones(2), requires_grad=True)
        with Tape() as tape:
            y = ops.sum(ops.mul(ops.detach(x), x))
        grads = tape.backward(y)
        assert np.allclose(grads[x], [1.0, 1.0])


class TestPrecision:
    """float32 by default, float64 inside precision()."""

    def test_default_float32(self):
        assert current_dtype() == np.float32
        assert Tensor(np.ones(2, dtype=np.float64)).data.dtype == np.float32

    def test_float64_block(self):
        with precision("float64"):
            assert Tensor(np.ones(2)).data.dtype == np.float64
        assert current_dtype() == np.float32


class TestGradcheck:
    """Analytic gradients match central differences within 1e-3 relative error."""

    @pytest.mark.parametrize("op", [
        lambda a, b: ops.mul(a, b),
        lambda a, b: ops.div(a, ops.add(ops.square(b), Tensor(np.ones((4, 3))))),
        lambda a, b: ops.atan2(a, b),
        lambda a, b: ops.cross(a, b),
        lambda a, b: ops.sub(a, ops.scale(b, 0.5)),
    ])
    @pytest.mark.parametrize("seed", range(20))
    def test_binary_ops(self, op, seed):
        rng = np.random.default_rng(seed)
        a, b = _away_from_zero(rng), _away_from_zero(rng)
        assert gradcheck(lambda x, y: _weighted(op(x, y)), [a, b]) < 1e-3

    @pytest.mark.parametrize("op", [
        ops.softmax,
        ops.layer_norm,
        lambda x: ops.norm(x),
        lambda x: ops.sqrt(ops.add(ops.square(x), Tensor(np.ones((4, 3))))),
        lambda x: ops.mean(x, axis=0, keepdims=True),
        lambda x: ops.slice_last(x, 1, 3),
        lambda x: ops.concat([x, ops.scale(x, 2.0)], axis=0),
        lambda x: ops.reshape(x, (3, 4)),
    ])
    @pytest.mark.parametrize("seed", range(20))
    def test_unary_ops(self, op, seed):
        x = _away_from_zero(np.random.default_rng(seed))
        assert gradcheck(lambda t: _weighted(op(t)), [x]) < 1e-3

    @pytest.mark.parametrize("seed", range(20))
    def test_relu_away_from_kink(self, seed):
        x = _away_from_zero(np.random.default_rng(seed))
        assert gradcheck(lambda t: _weighted(ops.relu(t)), [x]) < 1e-3

    @pytest.mark.parametrize("seed", range(20))
    def test_matmul(self, seed):
        rng = np.random.default_rng(seed)
        a, b = rng.normal(size=(3, 4)), rng.normal(size=(4, 2))
        assert gradcheck(lambda x, y: _weighted(ops.matmul(x, y)), [a, b]) < 1e-3

    @pytest.mark.parametrize("seed", range(20))
    def test_spmm(self, seed):
        rng = np.random.default_rng(seed)
        matrix = sp.random(5, 4, density=0.5, random_state=seed, format="csr")
        x = rng.normal(size=(4, 3))
        assert gradcheck(lambda t: _weighted(ops.spmm(matrix, t)), [x]) < 1e-3

    @pytest.mark.parametrize("seed", range(20))
    def test_gather_and_scatter(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(4, 3))
        index = np.array([0, 2, 2, 3, 1])
        assert gradcheck(lambda t: _weighted(ops.gather_rows(t, index)), [x]) < 1e-3
        assert gradcheck(lambda t: _weighted(ops.scatter_add_rows(t, np.array([1, 0, 1, 2]), 3)), [x]) < 1e-3

    @pytest.mark.parametrize("seed", range(20))
    def test_conv2d(self, seed):
        rng = np.random.default_rng(seed)
        image = rng.normal(size=(4, 5, 2))
        weight = rng.normal(size=(3, 3, 2, 3))
        bias = rng.normal(size=(3,))
        assert gradcheck(lambda x, w, b: _weighted(ops.conv2d(x, w, b)), [image, weight, bias]) < 1e-3

    @pytest.mark.parametrize("seed", range(20))
    def test_bias_broadcast(self, seed):
        rng = np.random.default_rng(seed)
        x, bias = rng.normal(size=(4, 3)), rng.normal(size=(3,))
        assert gradcheck(lambda a, b: _weighted(ops.add(a, b)), [x, bias]) < 1e-3


class TestShapeChecks:
    """Incompatible operands raise ShapeMismatchError."""

    def test_matmul_inner_dims(self):
        with pytest.raises(ShapeMismatchError):
            ops.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))

    def test_add_incompatible(self):
        with pytest.raises(ShapeMismatchError):
            ops.add(Tensor(np.ones((2, 3))), Tensor(np.ones((3, 2))))

    def test_gather_out_of_range(self):
        with pytest.raises(ShapeMismatchError):
            ops.gather_rows(Tensor(np.ones((2, 3))), np.array([2]))

    def test_conv2d_even_kernel(self):
        with pytest.raises(ShapeMismatchError):
            ops.conv2d(Tensor(np.ones((3, 3, 1))), Tensor(np.ones((2, 2, 1, 1))))


class TestParamStore:
    """Registration, state dicts and counting."""

    def test_duplicate_name_rejected(self, rng):
        store = ParamStore(rng)
        store.zeros("a.weight", (2, 2))
        with pytest.raises(ValueError):
            store.zeros("a.weight", (2, 2))

    def test_state_dict_roundtrip(self, rng):
        store = ParamStore(rng)
        store.kaiming("a.weight", (3, 2), fan_in=3)
        store.constant("a.bias", (2,), 1.0)
        other = ParamStore(np.random.default_rng(0))
        other.zeros("a.weight", (3, 2))
        other.zeros("a.bias", (2,))
        other.load_state_dict(store.state_dict())
        assert np.array_equal(other["a.weight"].data, store["a.weight"].data)
        assert store.count() == 8
        assert store.count("a.bias") == 2

    def test_load_shape_mismatch(self, rng):
        store = ParamStore(rng)
        store.zeros("w", (2, 2))
        with pytest.raises(ShapeMismatchError):
            store.load_state_dict({"w": np.zeros((3, 2))})

    def test_subset_by_prefix(self, rng):
        store = ParamStore(rng)
        store.zeros("encoder.w", (1,))
        store.zeros("dynamics.w", (1,))
        store.zeros("bone_net.w", (1,))
        assert set(store.subset(("encoder.", "dynamics."))) == {"encoder.w", "dynamics.w"}


class TestAdam:
    """Bias-corrected updates and the non-finite skip."""

    def test_first_step_moves_by_learning_rate(self):
        param = Tensor(np.array([1.0, 1.0, 1.0]), requires_grad=True)
        state = AdamState()
        adam_step({"p": param}, {"p": np.array([0.5, -2.0, 0.0], dtype=np.float32)}, state, lr=0.1)
        assert state.step == 1
        assert np.allclose(param.data, [0.9, 1.1, 1.0], atol=1e-6)

    def test_non_finite_gradient_skipped(self):
        param = Tensor(np.array([1.0, 2.0]), requires_grad=True)
        state = AdamState()
        adam_step({"p": param}, {"p": np.array([np.nan, 1.0], dtype=np.float32)}, state, lr=0.1)
        assert np.array_equal(param.data, np.array([1.0, 2.0], dtype=np.float32))
        assert state.skipped == 1
        assert "p" not in state.m

    def test_missing_gradient_leaves_parameter(self):
        param = Tensor(np.array([1.0]), requires_grad=True)
        state = AdamState()
        adam_step({"p": param}, {}, state, lr=0.1)
        assert param.data[0] == 1.0
        assert state.step == 1

    def test_gradient_shape_checked(self):
        param = Tensor(np.ones(2), requires_grad=True)
        with pytest.raises(ShapeMismatchError):
            adam_step({"p": param}, {"p": np.ones(3, dtype=np.float32)}, AdamState(), lr=0.1)

    def test_descends_quadratic_bowl(self, rng):
        target = rng.uniform(-2.0, 2.0, size=5)
        scale = rng.uniform(0.5, 4.0, size=5)
        param = Tensor(np.zeros(5), requires_grad=True)
        state = AdamState()
        for _ in range(3000):
            grad = (2.0 * scale * (param.data - target)).astype(np.float32)
            adam_step({"p": param}, {"p": grad}, state, lr=0.01)
        assert np.allclose(param.data, target, atol=0.05)

    def test_moments_decay_under_zero_gradient(self):
        param = Tensor(np.zeros(3), requires_grad=True)
        grad = np.array([0.5, -1.0, 2.0], dtype=np.float32)
        state = AdamState()
        adam_step({"p": param}, {"p": grad}, state, lr=0.01)
        zero = np.zeros(3, dtype=np.float32)
        for _ in range(10):
            adam_step({"p": param}, {"p": zero}, state, lr=0.01)
        assert np.allclose(state.m["p"], 0.9 ** 10 * 0.1 * grad, rtol=1e-5)
        assert np.allclose(state.v["p"], 0.999 ** 10 * 0.001 * grad * grad, rtol=1e-5)


class TestCheckpoint:
    """BNCK files: stable bytes, validation against expected shapes."""

    def test_roundtrip_and_stable_bytes(self, tmp_path, rng):
        arrays = {"a.weight": rng.normal(size=(3, 2)).astype(np.float32), "a.bias": np.zeros(2, dtype=np.float32)}
        first, second = tmp_path / "one.bnck", tmp_path / "two.bnck"
        save_checkpoint(first, arrays)
        save_checkpoint(second, arrays)
        assert first.read_bytes() == second.read_bytes()
        loaded = load_checkpoint(first, expected={"a.weight": (3, 2), "a.bias": (2,)})
        assert list(loaded) == ["a.weight", "a.bias"]
        assert np.array_equal(loaded["a.weight"], arrays["a.weight"])

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.bnck"
        path.write_bytes(b"NOPE" + b"\x00" * 8)
        with pytest.raises(FileFormatError):
            load_checkpoint(path)

    def test_truncated(self, tmp_path):
        path = tmp_path / "cut.bnck"
        save_checkpoint(path, {"w": np.ones((4, 4), dtype=np.float32)})
        path.write_bytes(path.read_bytes()[:-5])
        with pytest.raises(FileFormatError):
            load_checkpoint(path)

    def test_shape_mismatch(self, tmp_path):
        path = tmp_path / "w.bnck"
        save_checkpoint(path, {"w": np.ones((2, 2), dtype=np.float32)})
        with pytest.raises(FileFormatError):
            load_checkpoint(path, expected={"w": (2, 3)})

    def test_missing_record(self, tmp_path):
        path = tmp_path / "w.bnck"
        save_checkpoint(path, {"w": np.ones(2, dtype=np.float32)})
        with pytest.raises(FileFormatError):
            load_checkpoint(path, expected={"b": (2,)})
