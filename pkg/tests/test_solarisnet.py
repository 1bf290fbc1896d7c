import json
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gsrforecast import jsonio, numerics
from gsrforecast.dataio import fit_standardizer, synth_generate
from gsrforecast.seeding import rng_for
from gsrforecast.solarisnet import (
    LmState,
    NetworkSpec,
    SolarisNetModel,
    TrainConfig,
    TrainingDivergedError,
    deserialize,
    forward,
    init_params,
    jacobian,
    layout,
    levenberg_marquardt,
    lm_step,
    logsig,
    parameter_count,
    predict,
    serialize,
    tansig,
    train,
)
from oracles import solarisnet_scalar

SPEC = NetworkSpec()


def teacher_problem(seed=101, n=200, output_scale=100.0):
    """Inputs and noiseless targets from a random network.

    The output layer is scaled up so that the target carries real variance
    instead of sitting within 1e-4 of a constant.
    """
    rng = np.random.default_rng(seed)
    teacher = init_params(SPEC, rng)
    out = layout(SPEC)[1][-1]
    teacher[out.offset : out.offset + out.size] *= output_scale
    X = rng.normal(size=(n, 3))
    y = forward(SPEC, teacher, X)
    return X, y - y.mean()


def max_relative_error(a, b):
    """Max |a - b| relative to |b|, with |b| floored at 1e-3 of its largest magnitude."""
    b = np.asarray(b)
    floor = 1e-3 * np.max(np.abs(b))
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), floor)))


class TestActivations:
    def test_fixed_points_and_symmetry(self):
        assert tansig(0.0) == 0.0 and logsig(0.0) == 0.5
        n = np.linspace(-8, 8, 33)
        np.testing.assert_array_equal(tansig(-n), -tansig(n))

    def test_against_high_precision(self):
        mpmath.mp.dps = 40
        expected = 2 / (1 + mpmath.exp(-2)) - 1
        assert abs(tansig(1.0) - float(expected)) < 1e-16
        assert abs(logsig(1.5) - float(1 / (1 + mpmath.exp(-1.5)))) < 1e-16

    def test_stable_at_extremes(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            v = np.array([-700.0, 700.0])
            assert tansig(v).tolist() == [-1.0, 1.0]
            assert logsig(v)[1] == 1.0 and 0.0 <= logsig(v)[0] < 1e-300


class TestForward:
    def test_parameter_count(self):
        assert parameter_count(SPEC) == 64

    def test_zero_params_give_zero(self):
        assert forward(SPEC, np.zeros(64), [[0.3, -2.0, 1.0]])[0] == 0.0

    def test_matches_scalar_oracle(self, rng):
        for _ in range(10):
            p = rng.normal(size=64)
            x = rng.normal(size=3)
            assert abs(forward(SPEC, p, x)[0] - solarisnet_scalar(p, x)) < 1e-12

    def test_every_parameter_matters(self, rng):
        p = init_params(SPEC, rng) * 2
        x = np.array([0.4, -0.9, 1.3])
        base = forward(SPEC, p, x)[0]
        for k in range(64):
            q = p.copy()
            q[k] += 1e-3
            assert forward(SPEC, q, x)[0] != base, f"parameter {k} has no effect"

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="features"):
            forward(SPEC, np.zeros(64), [[1.0, 2.0]])

    def test_spec_validation(self):
        with pytest.raises(ValueError, match="embedding width"):
            NetworkSpec(embedding_width=3)
        with pytest.raises(ValueError, match="scalar"):
            NetworkSpec(output_count=2)

    @given(st.permutations([0, 1, 2]), st.integers(0, 10**6))
    def test_property_branch_permutation(self, perm, seed):
        rng = np.random.default_rng(seed)
        p = rng.normal(size=64)
        X = rng.normal(size=(4, 3))
        branches, trunk = layout(SPEC)
        size = sum(b.size for b in branches[0])
        q = p.copy()
        emb = trunk[0]
        W = p[emb.offset : emb.offset + emb.n_out * emb.n_in].reshape(emb.n_out, emb.n_in)
        Wq = W.copy()
        for new, old in enumerate(perm):
            q[new * size : (new + 1) * size] = p[old * size : (old + 1) * size]
            Wq[:, 2 * new : 2 * new + 2] = W[:, 2 * old : 2 * old + 2]
        q[emb.offset : emb.offset + emb.n_out * emb.n_in] = Wq.ravel()
        np.testing.assert_allclose(forward(SPEC, q, X[:, list(perm)]), forward(SPEC, p, X), rtol=0, atol=1e-14)


class TestJacobian:
    def test_output_bias_column(self):
        J, e = jacobian(SPEC, np.zeros(64), [[0.1, 0.2, 0.3]], [0.0])
        assert J[0, 63] == 1.0 and e[0] == 0.0

    def test_against_finite_differences(self, rng):
        for _ in range(20):
            p = rng.normal(size=64)
            X = rng.normal(size=(1, 3))
            J, _ = jacobian(SPEC, p, X, np.zeros(1))
            fd = numerics.finite_difference_jacobian(lambda q: forward(SPEC, q, X), p, h=1e-6)
            assert max_relative_error(J, fd) < 1e-5

    def test_duplicated_sample(self, rng):
        p = rng.normal(size=64)
        x = rng.normal(size=3)
        J, e = jacobian(SPEC, p, np.vstack([x, x]), [1.0, 1.0])
        assert np.array_equal(J[0], J[1]) and e[0] == e[1]

    def test_sign_convention(self, rng):
        p = rng.normal(size=64)
        X = rng.normal(size=(3, 3))
        _, e = jacobian(SPEC, p, X, [1.0, 2.0, 3.0])
        np.testing.assert_array_equal(e, forward(SPEC, p, X) - [1.0, 2.0, 3.0])

    def test_non_finite_raises(self):
        p = np.full(64, 1e308)
        with np.errstate(all="ignore"), pytest.raises(TrainingDivergedError):
            jacobian(SPEC, p, [[1.0, 1.0, 1.0]], [0.0])


def rosenbrock_residual(p):
    return np.array([10.0 * (p[1] - p[0] ** 2), 1.0 - p[0]])


def rosenbrock_jacobian(p):
    return np.array([[-20.0 * p[0], 10.0], [-1.0, 0.0]]), rosenbrock_residual(p)


class TestLevenbergMarquardt:
    def test_linear_case_single_step(self):
        A = np.array([[1.0], [2.0]])
        b = np.array([2.0, 4.0])
        cfg = TrainConfig(mu_init=1e-20, mu_min=1e-20)
        res = lambda p: A @ p - b
        state = LmState.start(np.array([0.0]), res(np.zeros(1)), cfg)
        new = lm_step(state, A, res(state.params), res, cfg)
        assert new.history[-1].accepted
        assert abs(new.params[0] - 2.0) < 1e-10

    def test_zero_residual_is_fixed_point(self):
        cfg = TrainConfig()
        res = lambda p: np.zeros(2)
        state = LmState.start(np.array([1.0, -1.0]), np.zeros(2), cfg)
        new = lm_step(state, np.eye(2), np.zeros(2), res, cfg)
        assert np.array_equal(new.params, state.params) and new.stop_reason == "stationary"

    def test_rosenbrock(self):
        st_ = levenberg_marquardt(np.array([-1.2, 1.0]), rosenbrock_jacobian, rosenbrock_residual, TrainConfig())
        accepted = [h.sse for h in st_.history if h.accepted]
        assert all(b < a for a, b in zip(accepted, accepted[1:]))
        assert st_.sse < 1e-10
        np.testing.assert_allclose(st_.params, [1.0, 1.0], atol=1e-6)

    def test_damping_termination(self):
        # the residual can only grow, so every step is rejected until mu passes mu_max
        res = lambda p: np.array([1.0 + p[0] ** 2])
        jac = lambda p: (np.array([[1.0]]), res(p))  # deliberately wrong Jacobian
        cfg = TrainConfig(mu_max=1e4, max_escalations=100)
        st_ = levenberg_marquardt(np.array([0.0]), jac, res, cfg)
        assert st_.stop_reason == "damping"
        assert not any(h.accepted for h in st_.history)
        assert cfg.mu_min <= st_.mu <= cfg.mu_max

    def test_config_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(mu_factor=1.0)
        with pytest.raises(ValueError):
            TrainConfig(grad_tol=0.0)


class TestTrain:
    def test_teacher_student_recovery(self):
        X, y = teacher_problem()
        m = train(SPEC, X, y, TrainConfig(seed=1, max_iterations=3000))
        assert y @ y > 1.0  # the target is far from trivial
        assert m.train_meta["final_sse"] < 1e-6
        r = forward(SPEC, m.params, X) - y
        assert float(r @ r) == m.train_meta["final_sse"]

    def test_zero_iterations_returns_init(self):
        X, y = teacher_problem(n=40)
        m = train(SPEC, X, y, TrainConfig(max_iterations=0, seed=3))
        np.testing.assert_array_equal(m.params, init_params(SPEC, rng_for(3, "solarisnet-init")))

    def test_deterministic(self):
        X, y = teacher_problem(n=60)
        cfg = TrainConfig(seed=4, max_iterations=50)
        a, b = train(SPEC, X, y, cfg), train(SPEC, X, y, cfg)
        assert a.params.tobytes() == b.params.tobytes()

    def test_warns_on_small_training_set(self):
        X, y = teacher_problem(n=10)
        with pytest.warns(UserWarning, match="recommended"):
            train(SPEC, X, y, TrainConfig(max_iterations=1))

    @settings(max_examples=15)
    @given(st.integers(0, 10**6))
    def test_property_lm_invariants(self, seed):
        X, y = teacher_problem(seed=seed, n=40, output_scale=10.0)
        cfg = TrainConfig(seed=seed, max_iterations=40)
        m = train(SPEC, X, y, cfg)
        accepted = [h.sse for h in m.history if h.accepted]
        assert all(b <= a for a, b in zip(accepted, accepted[1:]))
        assert all(cfg.mu_min <= h.mu <= cfg.mu_max for h in m.history)


def fitted_model(days=120, seed=0, iterations=200):
    ds = synth_generate("ds1", days=days, seed=seed)
    std = fit_standardizer(ds, ds.feature_names)
    X, y = std.apply(ds)
    return ds, train(SPEC, X, y, TrainConfig(seed=seed, max_iterations=iterations), std)


class TestPredict:
    def test_noiseless_fit_reproduces_targets(self):
        # targets built from a network on standardized inputs
        ds = synth_generate("ds1", days=250, seed=9)
        std = fit_standardizer(ds, ds.feature_names)
        X, _ = std.apply(ds)
        rng = np.random.default_rng(103)
        teacher = init_params(SPEC, rng)
        out = layout(SPEC)[1][-1]
        teacher[out.offset : out.offset + out.size] *= 100.0
        clean = ds.with_target(15.0 + forward(SPEC, teacher, X))
        std = fit_standardizer(clean, clean.feature_names)
        X, y = std.apply(clean)
        m = train(SPEC, X, y, TrainConfig(seed=0, max_iterations=3000), std)
        assert np.max(np.abs(predict(m, clean) - clean.target())) < 1e-3

    def test_empty_dataset(self):
        ds, m = fitted_model(iterations=5)
        assert predict(m, ds.subset([])).shape == (0,)

    def test_affine_bookkeeping(self):
        ds, m = fitted_model(iterations=20)
        X, _ = m.standardizer.apply(ds)
        np.testing.assert_array_equal(predict(m, ds), forward(SPEC, m.params, X) + m.standardizer.target_mean)

    def test_missing_feature(self):
        ds, m = fitted_model(iterations=1)
        m2 = SolarisNetModel(SPEC, m.params, type(m.standardizer)(("tmax_c", "rh", "sunshine_h"), (0, 0, 0), (1, 1, 1)))
        with pytest.raises(ValueError, match="rh"):
            predict(m2, ds)


class TestSerialization:
    def test_round_trip_bit_exact(self):
        ds, m = fitted_model()
        text = serialize(m)
        back = deserialize(text)
        assert back.params.tobytes() == m.params.tobytes()
        assert predict(back, ds).tobytes() == predict(m, ds).tobytes()
        assert serialize(back) == text
        doc = json.loads(text)
        assert doc["schema_version"] == 1 and doc["model_type"] == "solarisnet" and len(doc["params"]) == 64
        assert set(doc["train_meta"]) >= {"seed", "iterations", "final_sse"}

    def test_params_written_with_17_digits(self):
        _, m = fitted_model(iterations=3)
        doc = json.loads(serialize(m))
        assert '"params": [' in serialize(m)
        assert all(float(format(v, ".17g")) == v for v in doc["params"])

    @pytest.mark.parametrize(
        "mutate, message",
        [
            (lambda d: d.update(param_count=63), "param_count"),
            (lambda d: d["params"].pop(), "param_count"),
            (lambda d: d.update(checksum="0" * 64), "checksum"),
            (lambda d: d["params"].__setitem__(0, d["params"][0] + 1e-9), "checksum"),
            (lambda d: d.update(schema_version=2), "schema_version"),
            (lambda d: d.update(model_type="gpr"), "model_type"),
            (lambda d: d.pop("standardizer"), "incomplete"),
        ],
    )
    def test_tampered_documents(self, mutate, message):
        _, m = fitted_model(iterations=3)
        doc = json.loads(serialize(m))
        mutate(doc)
        with pytest.raises(jsonio.DocumentError, match=message):
            deserialize(json.dumps(doc))

    def test_truncated_document(self):
        _, m = fitted_model(iterations=3)
        text = serialize(m)
        with pytest.raises(jsonio.DocumentError, match="truncated"):
            deserialize(text[: len(text) // 2])
