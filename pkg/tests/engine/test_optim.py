"""Plain SGD updates."""

import numpy as np
import pytest

from hsdnet.engine.graph import ParamStore
from hsdnet.engine.optim import sgd_step
from hsdnet.errors import NonFiniteError, ShapeMismatchError


def test_single_update():
    updated = sgd_step(ParamStore({"w": np.array([1.0])}), {"w": np.array([0.5])}, lr=0.01)
    assert updated["w"][0] == pytest.approx(0.995, abs=1e-15)


def test_zero_gradient_is_identity(rng):
    params = ParamStore({"conv1.weight": rng.normal(size=(2, 3, 3, 3)), "conv1.bias": rng.normal(size=2)})
    grads = {k: np.zeros_like(v) for k, v in params.tensors.items()}
    updated = sgd_step(params, grads, lr=0.1)
    for key in params:
        np.testing.assert_array_equal(updated[key], params[key])


def test_input_store_is_not_mutated():
    params = ParamStore({"w": np.array([1.0, 2.0])})
    sgd_step(params, {"w": np.array([1.0, 1.0])}, lr=0.5)
    np.testing.assert_array_equal(params["w"], [1.0, 2.0])


def test_parameters_without_gradient_are_kept():
    params = ParamStore({"a": np.array([1.0]), "b": np.array([2.0])})
    updated = sgd_step(params, {"a": np.array([1.0])}, lr=1.0)
    assert updated["a"][0] == 0.0
    assert updated["b"] is params["b"]


@pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
def test_non_finite_gradient_is_rejected(bad):
    params = ParamStore({"w": np.array([1.0, 2.0])})
    with pytest.raises(NonFiniteError, match="w"):
        sgd_step(params, {"w": np.array([0.1, bad])}, lr=0.01)
    np.testing.assert_array_equal(params["w"], [1.0, 2.0])


def test_gradient_shape_must_match():
    with pytest.raises(ShapeMismatchError, match="w"):
        sgd_step(ParamStore({"w": np.ones(3)}), {"w": np.ones(2)}, lr=0.1)


def test_unknown_gradient_key():
    with pytest.raises(ShapeMismatchError, match="unknown parameter"):
        sgd_step(ParamStore({"w": np.ones(3)}), {"v": np.ones(3)}, lr=0.1)


@pytest.mark.parametrize("lr", [0.0, -0.1])
def test_learning_rate_must_be_positive(lr):
    with pytest.raises(ValueError):
        sgd_step(ParamStore({"w": np.ones(1)}), {"w": np.ones(1)}, lr=lr)
