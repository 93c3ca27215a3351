import math

import numpy as np
import pytest

from finnet import optimizer as adam
from finnet.network import MlpParams


def scalar_params(value):
    return MlpParams([np.array([[value]])], [np.array([0.0])])


def scalar_grad(g):
    return MlpParams([np.array([[g]])], [np.array([0.0])])


def test_zero_gradient_leaves_params():
    p = scalar_params(0.7)
    new, state = adam.step(adam.AdamState(lr=0.01), p, scalar_grad(0.0))
    assert new.bitwise_equal(p)
    assert state.t == 1


def test_first_step_size():
    # t=1: m = 0.1 g, v = 0.001 g^2, m_hat = g, v_hat = g^2 -> step = lr * g / (|g| + eps)
    new, _ = adam.step(adam.AdamState(lr=0.01), scalar_params(0.0), scalar_grad(1.0))
    expected = -0.01 * 1.0 / (1.0 + 1e-8)
    assert new.weights[0][0, 0] == pytest.approx(expected, rel=1e-12)
    assert new.weights[0][0, 0] == pytest.approx(-0.01, rel=1e-6)


def test_first_step_scale_invariant():
    a, _ = adam.step(adam.AdamState(lr=0.01), scalar_params(0.0), scalar_grad(0.3))
    b, _ = adam.step(adam.AdamState(lr=0.01), scalar_params(0.0), scalar_grad(300.0))
    da, db = a.weights[0][0, 0], b.weights[0][0, 0]
    assert abs(db - da) / abs(da) < 0.01


def test_non_finite_gradient_names_parameter():
    g = MlpParams([np.array([[1.0]]), np.array([[1.0]])], [np.array([0.0]), np.array([math.nan])])
    p = g.zeros_like()
    with pytest.raises(adam.NonFiniteGradientError, match="layer1.bias"):
        adam.step(adam.AdamState(), p, g)


def test_shape_mismatch():
    with pytest.raises(ValueError):
        adam.step(adam.AdamState(), scalar_params(0.0), MlpParams([np.zeros((2, 1))], [np.zeros(2)]))


def test_invalid_hyperparameters():
    with pytest.raises(ValueError):
        adam.AdamState(lr=0.0)
    with pytest.raises(ValueError):
        adam.AdamState(beta1=1.0)
    with pytest.raises(ValueError):
        adam.AdamState(eps=0.0)


def test_quadratic_loss_strictly_decreases():
    p, state = scalar_params(1.0), adam.AdamState(lr=0.01)
    losses = []
    for _ in range(100):
        theta = p.weights[0][0, 0]
        losses.append(theta**2)
        p, state = adam.step(state, p, scalar_grad(2 * theta))
    assert all(b < a for a, b in zip(losses, losses[1:]))


def test_step_deterministic_and_pure():
    p = scalar_params(0.5)
    s = adam.AdamState(lr=0.01)
    a1, s1 = adam.step(s, p, scalar_grad(0.2))
    a2, s2 = adam.step(s, p, scalar_grad(0.2))
    assert a1.bitwise_equal(a2) and s1.t == s2.t == 1
    assert s.t == 0 and p.weights[0][0, 0] == 0.5
