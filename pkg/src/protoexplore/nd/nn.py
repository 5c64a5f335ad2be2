"""Network building blocks on top of the tensor tape."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor, conv2d, layernorm, matmul, relu, tanh


def uniform_fan_in(rng: np.random.Generator, shape: tuple, fan_in: int) -> np.ndarray:
    """Scaled uniform init, U(-1/sqrt(fan_in), 1/sqrt(fan_in))."""
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(np.float32)


class Module:
    """Minimal container: tracks parameter tensors and child modules by attribute."""

    def named_parameters(self, prefix: str = "") -> dict[str, Tensor]:
        out: dict[str, Tensor] = {}
        for name, value in vars(self).items():
            key = f"{prefix}{name}"
            if isinstance(value, Tensor):
                out[key] = value
            elif isinstance(value, Module):
                out.update(value.named_parameters(f"{key}."))
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        out.update(item.named_parameters(f"{key}.{i}."))
                    elif isinstance(item, Tensor):
                        out[f"{key}.{i}"] = item
        return out

    def parameters(self) -> list[Tensor]:
        return list(self.named_parameters().values())

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.grad = None

    def set_requires_grad(self, flag: bool) -> None:
        for p in self.parameters():
            p.requires_grad = flag

    def copy_from(self, other: "Module") -> None:
        """Copy parameter values from a same-shaped module."""
        src = other.named_parameters()
        for name, p in self.named_parameters().items():
            if p.data.shape != src[name].data.shape:
                raise ValueError(f"shape mismatch for {name}: {p.data.shape} vs {src[name].data.shape}")
            p.data = src[name].data.copy()


def ema_update(target: Module, online: Module, momentum: float) -> None:
    """Slow-target EMA: target <- momentum * online + (1 - momentum) * target."""
    src = online.named_parameters()
    for name, p in target.named_parameters().items():
        s = src[name]
        if p.data.shape != s.data.shape:
            raise ValueError(f"EMA shape mismatch for {name}: {p.data.shape} vs {s.data.shape}")
        p.data = momentum * s.data + (1.0 - momentum) * p.data


class Linear(Module):
    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator):
        self.w = Tensor(uniform_fan_in(rng, (in_dim, out_dim), in_dim), requires_grad=True)
        self.b = Tensor(np.zeros(out_dim, dtype=np.float32), requires_grad=True)

    def __call__(self, x: Tensor) -> Tensor:
        return matmul(x, self.w) + self.b


class Conv2d(Module):
    def __init__(self, in_ch: int, out_ch: int, kernel: int, stride: int, rng: np.random.Generator):
        fan_in = in_ch * kernel * kernel
        self.w = Tensor(uniform_fan_in(rng, (out_ch, in_ch, kernel, kernel), fan_in), requires_grad=True)
        self.b = Tensor(np.zeros(out_ch, dtype=np.float32), requires_grad=True)
        self.stride = stride

    def __call__(self, x: Tensor) -> Tensor:
        return conv2d(x, self.w, self.b, stride=self.stride)


class LayerNorm(Module):
    def __init__(self, dim: int):
        self.gamma = Tensor(np.ones(dim, dtype=np.float32), requires_grad=True)
        self.beta = Tensor(np.zeros(dim, dtype=np.float32), requires_grad=True)

    def __call__(self, x: Tensor) -> Tensor:
        return layernorm(x, self.gamma, self.beta)


class MLP(Module):
    """Stack of Linear layers with ReLU between them (none after the last)."""

    def __init__(self, dims: list[int], rng: np.random.Generator):
        self.layers = [Linear(dims[i], dims[i + 1], rng) for i in range(len(dims) - 1)]

    def __call__(self, x: Tensor) -> Tensor:
        for i, layer in enumerate(self.layers):
            x = layer(x)
            if i < len(self.layers) - 1:
                x = relu(x)
        return x


def conv_out_hw(h: int, w: int, kernel: int, stride: int) -> tuple[int, int]:
    return (h - kernel) // stride + 1, (w - kernel) // stride + 1


class ConvEncoder(Module):
    """Four 3x3 conv layers (stride 2 then 1s), 32 channels, ReLU; flattened output.

    The flatten dimension scales with input resolution; `repr_dim` reports it.
    """

    CHANNELS = 32

    def __init__(self, in_ch: int, height: int, width: int, rng: np.random.Generator):
        self.convs = [
            Conv2d(in_ch, self.CHANNELS, 3, 2, rng),
            Conv2d(self.CHANNELS, self.CHANNELS, 3, 1, rng),
            Conv2d(self.CHANNELS, self.CHANNELS, 3, 1, rng),
            Conv2d(self.CHANNELS, self.CHANNELS, 3, 1, rng),
        ]
        h, w = conv_out_hw(height, width, 3, 2)
        for _ in range(3):
            h, w = conv_out_hw(h, w, 3, 1)
        self.out_hw = (h, w)
        self.repr_dim = self.CHANNELS * h * w

    def __call__(self, x: Tensor) -> Tensor:
        for conv in self.convs:
            x = relu(conv(x))
        return x.reshape((x.shape[0], self.repr_dim))


class TrunkHead(Module):
    """Feature head used by actor and critic: Linear -> LayerNorm -> tanh."""

    def __init__(self, in_dim: int, feature_dim: int, rng: np.random.Generator):
        self.fc = Linear(in_dim, feature_dim, rng)
        self.norm = LayerNorm(feature_dim)

    def __call__(self, x: Tensor) -> Tensor:
        return tanh(self.norm(self.fc(x)))
