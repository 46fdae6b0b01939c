"""Plain stochastic gradient descent."""

from collections.abc import Mapping

import numpy as np

from ..errors import NonFiniteError, ShapeMismatchError
from .graph import ParamStore


def sgd_step(params: ParamStore, grads: Mapping[str, np.ndarray], lr: float) -> ParamStore:
    """Return a new store with ``p - lr * g`` for every parameter that has a gradient."""
    if lr <= 0:
        raise ValueError(f"learning rate must be positive, got {lr}")
    updated = dict(params.tensors)
    for key, g in grads.items():
        if key not in updated:
            raise ShapeMismatchError(f"gradient for unknown parameter {key}")
        p = updated[key]
        if g.shape != p.shape:
            raise ShapeMismatchError(f"{key}: gradient shape {g.shape} != parameter shape {p.shape}")
        if not np.all(np.isfinite(g)):
            raise NonFiniteError(f"{key}: non-finite gradient, training halted")
        updated[key] = p - lr * g
    return ParamStore(updated)
