"""Adam: closed-form first step, zero-gradient no-op, scalar descent."""

import numpy as np
import pytest

from actalarm.nn import AdamState
from actalarm.util import ShapeError


def test_first_step_delta_is_learning_rate():
    # at t=1 bias correction makes m_hat/sqrt(v_hat) = g/|g| up to eps,
    # so the parameter moves by almost exactly lr
    w = [np.array([1.0])]
    state = AdamState(w, lr=0.001)
    state.step(w, [np.array([1.0])])
    delta = w[0][0] - 1.0
    assert abs(abs(delta) - 0.001) < 1e-6
    assert delta < 0
    assert state.t == 1


def test_zero_gradient_leaves_parameters_unchanged():
    w = [np.array([0.3, -0.7]), np.array([[1.0, 2.0]])]
    state = AdamState(w, lr=0.01)
    before = [p.copy() for p in w]
    state.step(w, [np.zeros(2), np.zeros((1, 2))])
    for b, p in zip(before, w):
        np.testing.assert_array_equal(b, p)


def test_descent_on_quadratic_is_monotone():
    # f(w) = w^2, grad = 2w, start at w=1
    w = [np.array([1.0])]
    state = AdamState(w, lr=0.01)
    values = [abs(w[0][0])]
    for _ in range(100):
        state.step(w, [2.0 * w[0]])
        values.append(abs(w[0][0]))
    diffs = np.diff(values[1:])  # strictly decreasing after step 1
    assert np.all(diffs < 0)


def test_step_counter_increments_by_one():
    w = [np.zeros(3)]
    state = AdamState(w, lr=0.1)
    for expected in range(1, 6):
        state.step(w, [np.ones(3)])
        assert state.t == expected


def test_shape_mismatch_raises():
    w = [np.zeros((2, 2))]
    state = AdamState(w, lr=0.1)
    with pytest.raises(ShapeError):
        state.step(w, [np.zeros(3)])
    with pytest.raises(ShapeError):
        state.step(w, [np.zeros((2, 2)), np.zeros(1)])
