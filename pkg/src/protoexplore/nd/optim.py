"""Adam with bias correction over named parameter sets."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor


class MissingGradError(RuntimeError):
    pass


class Adam:
    def __init__(
        self,
        params: dict[str, Tensor],
        lr: float = 1e-4,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.params = dict(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m = {k: np.zeros_like(p.data) for k, p in self.params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in self.params.items()}

    def step(self) -> None:
        """One Adam update over all params; clears their grads."""
        for name, p in self.params.items():
            if p.grad is None:
                raise MissingGradError(f"parameter '{name}' has no gradient")
        self.step_count += 1
        t = self.step_count
        bc1 = 1.0 - self.beta1**t
        bc2 = 1.0 - self.beta2**t
        for name, p in self.params.items():
            g = p.grad
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            mhat = m / bc1
            vhat = v / bc2
            p.data -= self.lr * mhat / (np.sqrt(vhat) + self.eps)
            p.grad = None

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None

    def state_arrays(self, prefix: str) -> dict[str, np.ndarray]:
        """Moment buffers and step counter as named float32 arrays (for checkpoints)."""
        out = {f"{prefix}/step": np.array([self.step_count], dtype=np.float32)}
        for name in self.params:
            out[f"{prefix}/{name}/m"] = self.m[name].astype(np.float32)
            out[f"{prefix}/{name}/v"] = self.v[name].astype(np.float32)
        return out

    def load_state_arrays(self, prefix: str, blobs: dict[str, np.ndarray]) -> None:
        self.step_count = int(blobs[f"{prefix}/step"][0])
        for name in self.params:
            self.m[name] = blobs[f"{prefix}/{name}/m"].copy()
            self.v[name] = blobs[f"{prefix}/{name}/v"].copy()
