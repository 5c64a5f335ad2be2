"""Central finite-difference gradient verification (64-bit mode)."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .tensor import Tensor


def finite_difference_grads(
    fn: Callable[[Sequence[Tensor]], Tensor],
    inputs: Sequence[np.ndarray],
    delta: float = 1e-5,
) -> list[np.ndarray]:
    """Numerical gradient of a scalar-valued fn w.r.t. each float64 input."""

    def value(arrays: Sequence[np.ndarray]) -> float:
        return float(fn([Tensor(a, requires_grad=False) for a in arrays]).data)

    grads = []
    for i, base in enumerate(inputs):
        g = np.zeros_like(base, dtype=np.float64)
        gflat = g.reshape(-1)
        for j in range(base.size):
            arrays = [a.copy() for a in inputs]
            arrays[i].reshape(-1)[j] = base.reshape(-1)[j] + delta
            up = value(arrays)
            arrays[i].reshape(-1)[j] = base.reshape(-1)[j] - delta
            down = value(arrays)
            gflat[j] = (up - down) / (2.0 * delta)
        grads.append(g)
    return grads


def check_gradients(
    fn: Callable[[Sequence[Tensor]], Tensor],
    inputs: Sequence[np.ndarray],
    delta: float = 1e-5,
    rtol: float = 1e-4,
) -> float:
    """Compare tape gradients against central differences; returns max relative error.

    Inputs must be float64. Raises AssertionError when the relative error
    (scaled by the larger magnitude, floored at 1) exceeds rtol.
    """
    tensors = [Tensor(a.astype(np.float64), requires_grad=True) for a in inputs]
    out = fn(tensors)
    out.backward()
    numeric = finite_difference_grads(fn, [np.asarray(a, dtype=np.float64) for a in inputs], delta)
    worst = 0.0
    for t, num in zip(tensors, numeric):
        ana = t.grad if t.grad is not None else np.zeros_like(num)
        scale = np.maximum(np.maximum(np.abs(ana), np.abs(num)), 1.0)
        err = float(np.max(np.abs(ana - num) / scale))
        worst = max(worst, err)
    if worst > rtol:
        raise AssertionError(f"gradient check failed: max relative error {worst:.3e} > {rtol:.0e}")
    return worst
