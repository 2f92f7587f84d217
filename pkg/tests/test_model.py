import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gibbsbound import model


def finite_difference_gradient(params, arch, X, y, cfg, eps=1e-5):
    grad = np.empty_like(params)
    for i in range(params.size):
        hi = params.copy()
        hi[i] += eps
        lo = params.copy()
        lo[i] -= eps
        grad[i] = (
            model.loss_and_gradient(hi, arch, X, y, cfg)[0]
            - model.loss_and_gradient(lo, arch, X, y, cfg)[0]
        ) / (2 * eps)
    return grad


def test_architecture_validation_and_count():
    arch = model.Architecture((3, 4, 1))
    assert arch.param_count == 3 * 4 + 4 + 4 * 1 + 1
    with pytest.raises(ValueError):
        model.Architecture((3, 4, 2))
    with pytest.raises(ValueError):
        model.Architecture((3,))


def test_init_params_matches_prior_width():
    arch = model.Architecture((99999, 1))  # 1e5 parameters
    params = model.init_params(arch, 5.0, 0)
    assert abs(params.mean()) <= 0.05 * 5.0
    assert 0.99 * 5.0 <= params.std() <= 1.01 * 5.0
    assert np.array_equal(params, model.init_params(arch, 5.0, 0))
    with pytest.raises(ValueError):
        model.init_params(arch, 0.0, 0)


def test_forward_linear_hand_case():
    arch = model.Architecture((2, 1))
    scores = model.forward_scores(np.array([1.0, 2.0, 0.5]), arch, np.array([[3.0, -1.0]]))
    assert scores[0] == pytest.approx(1.5, abs=1e-15)


def test_forward_zero_params_and_zero_inputs():
    arch = model.Architecture((3, 5, 1))
    zero = np.zeros(arch.param_count)
    X = np.random.default_rng(0).standard_normal((4, 3))
    assert np.all(model.forward_scores(zero, arch, X) == 0.0)
    params = model.init_params(arch, 1.0, 1)
    weights, biases = model.unpack(params.copy(), arch)
    for b in biases:
        b[...] = 0.0
    flat = np.concatenate([np.concatenate((w.ravel(), b)) for w, b in zip(weights, biases)])
    assert np.all(model.forward_scores(flat, arch, np.zeros((2, 3))) == 0.0)


def test_surrogate_anchor_values():
    bbce = model.LossConfig(kind="bbce", p_min=math.exp(-4.0))
    assert model.surrogate_loss(0.0, 1, bbce) == pytest.approx(math.log(2.0) / 4.0, abs=1e-15)
    savage = model.LossConfig(kind="savage")
    assert model.surrogate_loss(0.0, 1, savage) == pytest.approx(0.25, abs=1e-15)
    assert model.surrogate_loss(400.0, 1, savage) == pytest.approx(0.0, abs=1e-15)
    assert model.surrogate_loss(-400.0, 1, savage) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(
    st.floats(-1e6, 1e6, allow_nan=False),
    st.sampled_from((-1, 1)),
    st.sampled_from(("bbce", "savage")),
)
def test_surrogate_stays_in_unit_interval(score, label, kind):
    value = model.surrogate_loss(score, label, model.LossConfig(kind=kind))
    assert 0.0 <= value <= 1.0


def test_surrogate_range_bulk():
    rng = np.random.default_rng(8)
    scores = rng.standard_normal(1_000_000) * np.exp(rng.uniform(0, 8, 1_000_000))
    labels = rng.choice([-1.0, 1.0], scores.size)
    for kind in ("bbce", "savage"):
        vals = model.surrogate_loss_many(scores, labels, model.LossConfig(kind=kind))
        assert vals.min() >= 0.0 and vals.max() <= 1.0


def test_gradient_against_finite_differences():
    rng = np.random.default_rng(42)
    for kind in ("bbce", "savage"):
        cfg = model.LossConfig(kind=kind)
        for _ in range(6):
            arch = model.Architecture(
                (int(rng.integers(2, 9)), int(rng.integers(2, 9)), 1)
            )
            params = 0.7 * rng.standard_normal(arch.param_count)
            X = rng.standard_normal((8, arch.d_in))
            y = rng.choice([-1.0, 1.0], 8)
            _, grad = model.loss_and_gradient(params, arch, X, y, cfg)
            fd = finite_difference_gradient(params, arch, X, y, cfg)
            mask = np.abs(fd) > 1e-6  # skip coordinates pinned at kinks
            assert np.all(
                np.abs(grad[mask] - fd[mask]) <= 1e-4 * np.abs(fd[mask]) + 1e-8
            )


def test_gradient_mean_invariance_under_duplication():
    rng = np.random.default_rng(3)
    arch = model.Architecture((4, 3, 1))
    cfg = model.LossConfig(kind="bbce")
    params = rng.standard_normal(arch.param_count)
    X = rng.standard_normal((5, 4))
    y = rng.choice([-1.0, 1.0], 5)
    loss1, grad1 = model.loss_and_gradient(params, arch, X, y, cfg)
    loss2, grad2 = model.loss_and_gradient(
        params, arch, np.vstack([X, X]), np.concatenate([y, y]), cfg
    )
    assert loss1 == pytest.approx(loss2, abs=1e-15)
    np.testing.assert_allclose(grad1, grad2, atol=1e-15)


def test_saturated_savage_gradient_vanishes():
    arch = model.Architecture((2, 1))
    params = np.array([50.0, 50.0, 0.0])
    X = np.array([[10.0, 10.0], [8.0, 12.0]])
    y = np.array([1.0, 1.0])  # margins ~1000, deeply saturated
    _, grad = model.loss_and_gradient(params, arch, X, y, model.LossConfig(kind="savage"))
    assert np.linalg.norm(grad) <= 1e-8


def test_loss_and_gradient_validation():
    arch = model.Architecture((2, 1))
    with pytest.raises(ValueError):
        model.loss_and_gradient(np.zeros(3), arch, np.zeros((0, 2)), np.zeros(0),
                                model.LossConfig())
    with pytest.raises(ValueError):
        model.forward_scores(np.zeros(3), arch, np.zeros((1, 5)))


def test_zero_one_error_cases():
    assert model.zero_one_error(np.array([2.0, -1.0]), np.array([1, 1])) == 0.5
    # ties count as correct: 0 * y is not strictly below the threshold
    assert model.zero_one_error(np.zeros(4), np.ones(4), 0.0) == 0.0
    assert model.zero_one_error(np.zeros(4), np.ones(4), 0.1) == 1.0
    with pytest.raises(ValueError):
        model.zero_one_error(np.array([]), np.array([]))


def test_zero_one_error_random_rate():
    rng = np.random.default_rng(0)
    rate = model.zero_one_error(rng.standard_normal(10000), rng.choice([-1.0, 1.0], 10000))
    assert 0.47 <= rate <= 0.53
