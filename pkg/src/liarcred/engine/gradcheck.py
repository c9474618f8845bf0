"""Central finite-difference oracle for checking analytic gradients."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .tensor import Tensor, backward


def numeric_gradient(f: Callable[[], float], array: np.ndarray, step: float = 1e-4) -> np.ndarray:
    """d f / d array by central differences, perturbing ``array`` in place."""
    grad = np.zeros_like(array)
    flat = array.reshape(-1)
    out = grad.reshape(-1)
    for k in range(flat.size):
        orig = flat[k]
        flat[k] = orig + step
        plus = f()
        flat[k] = orig - step
        minus = f()
        flat[k] = orig
        out[k] = (plus - minus) / (2.0 * step)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """``||a - n|| / (||a|| + ||n||)``; 0 when both vanish."""
    denom = np.linalg.norm(analytic) + np.linalg.norm(numeric)
    if denom == 0.0:
        return 0.0
    return float(np.linalg.norm(analytic - numeric) / denom)


def check_gradients(loss_fn: Callable[[], Tensor], params: dict, step: float = 1e-4) -> dict:
    """Relative error per parameter between backprop and central differences.

    ``loss_fn`` must rebuild the graph from the current parameter values and
    be deterministic (no dropout sampling between calls).
    """
    for p in params.values():
        p.grad = None
    backward(loss_fn())
    errors = {}
    for name, p in params.items():
        analytic = p.grad if p.grad is not None else np.zeros_like(p.data)
        numeric = numeric_gradient(lambda: loss_fn().item(), p.data, step)
        errors[name] = relative_error(analytic, numeric)
    return errors
