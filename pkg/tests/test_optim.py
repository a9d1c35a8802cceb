import numpy as np
import pytest

from testbench.errors import DimensionError, NonFiniteGradientError
from testbench.numerics.optim import AdamState, adam_step


def test_first_step_moves_by_learning_rate():
    state = AdamState(learning_rate=0.01)
    params = {"w": np.array([1.0, -2.0, 3.0])}
    grads = {"w": np.array([0.5, -4.0, 1e-3])}
    new = adam_step(state, params, grads)
    np.testing.assert_allclose(new["w"], params["w"] - 0.01 * np.sign(grads["w"]), atol=1e-6)
    assert state.step == 1


def test_inputs_are_not_mutated():
    params = {"w": np.ones(2)}
    adam_step(AdamState(), params, {"w": np.ones(2)})
    np.testing.assert_array_equal(params["w"], np.ones(2))


def test_zero_gradient_is_a_no_op():
    params = {"w": np.array([1.5, -0.5])}
    new = adam_step(AdamState(), params, {"w": np.zeros(2)})
    np.testing.assert_array_equal(new["w"], params["w"])


def test_converges_on_quadratic():
    state = AdamState(learning_rate=0.05)
    params = {"w": np.zeros(3)}
    target = np.array([3.0, -1.0, 0.5])
    for _ in range(2000):
        params = adam_step(state, params, {"w": 2.0 * (params["w"] - target)})
    np.testing.assert_allclose(params["w"], target, atol=5e-2)


def test_non_finite_gradient_names_block():
    with pytest.raises(NonFiniteGradientError) as info:
        adam_step(AdamState(), {"a": np.ones(2), "b": np.ones(2)},
                  {"a": np.ones(2), "b": np.array([1.0, np.nan])})
    assert info.value.block == "b"


def test_shape_mismatch():
    with pytest.raises(DimensionError):
        adam_step(AdamState(), {"w": np.ones(2)}, {"w": np.ones(3)})


def test_missing_gradient():
    with pytest.raises(DimensionError):
        adam_step(AdamState(), {"w": np.ones(2)}, {})
