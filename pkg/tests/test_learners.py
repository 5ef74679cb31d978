from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import expit

from otbound.learners import (
    AdamState,
    CrossEntropy,
    Huber,
    MlpModel,
    Ramp,
    TrainConfig,
    adamw_step,
    adversarial_example,
    effective_lr,
    input_gradient,
    logit_field,
    loss_eval,
    mlp_forward,
    mlp_grad,
    regression_target,
    spectral_lipschitz_upper,
    synth_classification,
    synth_regression,
    train,
    zero_one,
)
from otbound.learners.tasks import sample_labels
from otbound.partitioning import Box

from oracles import central_difference


def random_model(rng, widths):
    W = [rng.normal(size=(a, b)) / math.sqrt(a) for a, b in zip(widths[:-1], widths[1:])]
    b = [rng.normal(size=n) * 0.3 for n in widths[1:]]
    return MlpModel(W, b)


def test_forward_examples():
    zero = MlpModel.zeros([3, 8, 8, 1])
    assert np.all(mlp_forward(zero, np.random.default_rng(0).normal(size=(5, 3))) == 0)
    affine = MlpModel([np.array([[2.0]])], [np.array([1.0])])
    assert mlp_forward(affine, 3.0) == 7.0
    with pytest.raises(ValueError):
        mlp_forward(zero, np.zeros((2, 4)))


def test_shape_validation():
    with pytest.raises(ValueError):
        MlpModel([np.zeros((2, 3)), np.zeros((4, 1))], [np.zeros(3), np.zeros(1)])
    with pytest.raises(ValueError):
        MlpModel([np.zeros((2, 3))], [np.zeros(3)])


def test_leaky_slope_and_subgradient_at_zero():
    m = MlpModel([np.array([[1.0]]), np.array([[1.0]])], [np.zeros(1), np.zeros(1)])
    assert mlp_forward(m, -2.0) == pytest.approx(-0.2)
    assert input_gradient(m, np.array([0.0]))[0, 0] == pytest.approx(0.1)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_operator_norm_continuity(seed):
    rng = np.random.default_rng(seed)
    m = random_model(rng, [3, 16, 16, 1])
    x, x2 = rng.normal(size=(50, 3)), rng.normal(size=(50, 3))
    lhs = np.abs(mlp_forward(m, x) - mlp_forward(m, x2))
    assert np.all(lhs <= spectral_lipschitz_upper(m) * np.linalg.norm(x - x2, axis=1) + 1e-12)


def _loss_of(model, loss, x, y):
    return float(np.mean(loss.value(mlp_forward(model, x), y)))


@pytest.mark.parametrize("loss", [Huber(), CrossEntropy(), Ramp(2.0)])
def test_gradients_match_finite_differences(loss):
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 34:
        m = random_model(rng, [2, 6, 5, 1])
        x = rng.normal(size=(3, 2))
        y = rng.choice([-1.0, 1.0], 3) if loss.discrete_labels else rng.normal(size=3)
        pred = mlp_forward(m, x)
        if isinstance(loss, Ramp) and np.any(np.abs(pred * y) < 1e-3) | np.any(np.abs(pred * y - 2.0) < 1e-3):
            continue
        grads, gx = mlp_grad(m, loss, x, y)
        for j, (dW, db) in enumerate(grads):
            def fw(W, j=j):
                mm = m.copy()
                mm.weights[j] = W
                return _loss_of(mm, loss, x, y)

            def fb(b, j=j):
                mm = m.copy()
                mm.biases[j] = b
                return _loss_of(mm, loss, x, y)

            np.testing.assert_allclose(dW, central_difference(fw, m.weights[j]), rtol=1e-4, atol=1e-7)
            np.testing.assert_allclose(db, central_difference(fb, m.biases[j]), rtol=1e-4, atol=1e-7)
        for i in range(len(x)):
            fd = central_difference(lambda xi: float(loss.value(mlp_forward(m, xi[None])[0], y[i])), x[i])
            np.testing.assert_allclose(gx[i], fd, rtol=1e-4, atol=1e-7)
        checked += 1


def test_zero_residual_gives_zero_gradients():
    rng = np.random.default_rng(3)
    m = random_model(rng, [2, 4, 1])
    x = rng.normal(size=(1, 2))
    grads, gx = mlp_grad(m, Huber(), x, mlp_forward(m, x))
    assert all(np.all(dW == 0) and np.all(db == 0) for dW, db in grads) and np.all(gx == 0)


def test_ramp_flat_region_has_zero_input_gradient():
    m = MlpModel([np.array([[1.0], [2.0]])], [np.array([10.0])])
    _, gx = mlp_grad(m, Ramp(5.0), np.array([[1.0, 1.0]]), 1.0)
    assert np.all(gx == 0)


def test_loss_examples():
    assert loss_eval(Huber(), 0.5, 0.0) == 0.25
    assert loss_eval(Huber(), 2.0, 0.0) == 2.0
    assert loss_eval(Ramp(5.0), 0.0, 1.0) == 1.0
    assert loss_eval(Ramp(5.0), 5.0, 1.0) == 0.0
    assert loss_eval(CrossEntropy(), 0.0, 1.0) == pytest.approx(math.log(2))
    with pytest.raises(ValueError):
        loss_eval(Ramp(1.0), 0.3, 0.5)
    with pytest.raises(ValueError):
        Ramp(0.0)


@settings(max_examples=200, deadline=None)
@given(f=st.floats(-50, 50), y=st.sampled_from([-1.0, 1.0]), g=st.floats(0.01, 20))
def test_ramp_dominates_zero_one(f, y, g):
    assert Ramp(g).value(f, y) >= zero_one(f, y)


@settings(max_examples=200, deadline=None)
@given(a=st.floats(-5, 5), b=st.floats(-5, 5), y=st.floats(-2, 2))
def test_huber_is_two_lipschitz(a, b, y):
    h = Huber()
    assert abs(h.value(a, y) - h.value(b, y)) <= h.lipschitz * abs(a - b) + 1e-12


def test_huber_slope_approaches_two():
    h = Huber()
    a, b = 0.999999, 0.999998
    assert abs(h.value(a, 0) - h.value(b, 0)) / (a - b) == pytest.approx(2.0, rel=1e-5)


def test_adamw_zero_gradient():
    rng = np.random.default_rng(0)
    m = random_model(rng, [2, 4, 1])
    zeros = [(np.zeros_like(W), np.zeros_like(b)) for W, b in zip(m.weights, m.biases)]
    before = m.copy()
    adamw_step(m, zeros, TrainConfig(weight_decay=0.0), 0, AdamState.zeros_like(m))
    assert all(np.array_equal(a, b) for a, b in zip(m.weights, before.weights))
    adamw_step(m, zeros, TrainConfig(weight_decay=0.1), 0, AdamState.zeros_like(m))
    assert m.squared_weight_norm() < before.squared_weight_norm()
    assert all(np.array_equal(a, b) for a, b in zip(m.biases, before.biases))


def test_learning_rate_schedule():
    assert effective_lr(0.05, 999) == 0.05
    assert effective_lr(0.05, 1000) == pytest.approx(0.0425)
    assert effective_lr(0.05, 2500) == pytest.approx(0.05 * 0.85**2)


def test_task_functions():
    assert regression_target(-2.0) == 0.5
    # direct evaluation: the distance term vanishes at (2, 2)
    assert logit_field(np.array([2.0, 2.0])) == pytest.approx(-0.25 * math.sin(4) + 1.5 * math.cos(2), rel=1e-14)
    assert logit_field(np.array([2.0, 2.0])) == pytest.approx(-0.43495, abs=1e-4)


def test_datasets_deterministic_and_in_range():
    a, b = synth_regression(300, 4), synth_regression(300, 4)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)
    assert a.x.min() >= -5 and a.x.max() <= 5 and a.y.min() >= -1 and a.y.max() <= 2
    c = synth_classification(300, 4)
    assert set(np.unique(c.y)) <= {-1.0, 1.0} and c.x.shape == (300, 2)
    with pytest.raises(ValueError):
        synth_regression(0, 0)


def test_label_frequencies_within_binomial_bands():
    rng = np.random.default_rng(11)
    g = np.linspace(-4.5, 4.5, 10)
    pts = np.array([[a, b] for a in g for b in g])
    draws = 10_000
    for x in pts:
        freq = np.mean(sample_labels(rng, np.broadcast_to(x, (draws, 2))) > 0)
        p = expit(logit_field(x))
        band = 3 * math.sqrt(max(p * (1 - p), 1e-300) / draws)
        assert abs(freq - p) <= band + 1e-12


def test_dataset_csv(tmp_path):
    d = synth_regression(5, 0)
    d.to_csv(tmp_path / "d.csv")
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0] == "x1,y" and len(lines) == 6


def test_adversarial_examples():
    w = np.array([[0.5], [-1.0]])
    m = MlpModel([w], [np.zeros(1)])
    x = np.array([[0.2, 0.1]])
    y = np.array([0.3])
    assert np.array_equal(adversarial_example(m, Huber(), x, y, 0.0), x)
    r = float(mlp_forward(m, x)[0] - y[0])  # in the squared branch
    np.testing.assert_allclose(adversarial_example(m, Huber(), x, y, 0.1), x + 0.1 * 2 * r * w.T)
    dom = Box((-1, -1), (1, 1))
    edge = np.array([[1.0, 0.0]])
    m2 = MlpModel([np.array([[1.0], [0.0]])], [np.zeros(1)])
    out = adversarial_example(m2, Huber(), edge, np.array([0.5]), 0.5, dom)
    assert out[0, 0] == 1.0
    with pytest.raises(ValueError):
        adversarial_example(m, Huber(), x, y, -1.0)


def test_model_serialization_roundtrip(tmp_path):
    m = random_model(np.random.default_rng(5), [2, 3, 1])
    m.save(tmp_path / "m.txt")
    assert (tmp_path / "m.txt").read_text().startswith("widths 2 3 1")
    m2 = MlpModel.load(tmp_path / "m.txt")
    assert all(np.array_equal(a, b) for a, b in zip(m.weights, m2.weights))
    assert m.n_params == m2.n_params == 2 * 3 + 3 + 3 + 1


def test_training_is_deterministic_and_truncates():
    d = synth_regression(64, 1)
    cfg = TrainConfig(iterations=60, seed=1)
    m1, h1 = train(d, cfg, Huber())
    m2, h2 = train(d, cfg, Huber())
    assert h1 == h2 and all(np.array_equal(a, b) for a, b in zip(m1.weights, m2.weights))
    _, h3 = train(d, cfg, Huber(), early_stop_at=25)
    assert len(h3) == 25 and h3 == h1[:25]
    with pytest.raises(ValueError):
        train(d, TrainConfig(batch=100), Huber())


def test_adversarial_training_changes_trajectory():
    d = synth_regression(64, 1)
    _, h0 = train(d, TrainConfig(iterations=20), Huber())
    _, h1 = train(d, TrainConfig(iterations=20, adv_eps=0.5), Huber())
    assert h0[0] != h1[0]


def test_weight_decay_shrinks_weights():
    d = synth_regression(256, 2)
    a, _ = train(d, TrainConfig(iterations=500, seed=2), Huber())
    b, _ = train(d, TrainConfig(iterations=500, seed=2, weight_decay=0.01), Huber())
    assert b.squared_weight_norm() < a.squared_weight_norm()


@pytest.mark.slow
def test_regression_reaches_noise_floor():
    d = synth_regression(2560, 0)
    m, _ = train(d, TrainConfig(), Huber())
    assert float(np.mean(Huber().value(mlp_forward(m, d.x), d.y))) <= 0.02
