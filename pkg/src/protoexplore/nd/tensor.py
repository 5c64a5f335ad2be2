"""Dense n-d float tensors with reverse-mode autodiff.

A Tensor wraps a numpy array plus an optional gradient buffer. Every op
records a backward closure on the output while gradients are enabled;
``backward()`` on a scalar walks the recorded graph in reverse topological
order and accumulates into ``.grad`` numpy arrays. float32 is the training
dtype; build tensors from float64 arrays to run the same graph in 64-bit
(used by the finite-difference gradient checks).
"""

from __future__ import annotations

import contextlib
from typing import Iterable, Sequence

import numpy as np

EPS = 1e-8  # guard for log / l2-normalize denominators

_grad_enabled = True


@contextlib.contextmanager
def no_grad():
    """Disable tape recording inside the block (forward values unchanged)."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


def grad_enabled() -> bool:
    return _grad_enabled


def _sum_to_shape(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Undo numpy broadcasting: reduce grad back to the operand's shape."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_backward", "_parents")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        arr = np.asarray(data, dtype=dtype)
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(np.float32)
        self.data: np.ndarray = arr
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        self._backward = None
        self._parents: tuple = ()

    # ------------------------------------------------------------------ infra

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def dtype(self):
        return self.data.dtype

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        """Leaf tensor sharing this data; no gradient flows into the subgraph."""
        return Tensor(self.data, requires_grad=False)

    def zero_grad(self) -> None:
        self.grad = None

    def accumulate_grad(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = g.astype(self.data.dtype, copy=True)
        else:
            self.grad += g

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype}, requires_grad={self.requires_grad})"

    def backward(self) -> None:
        """Backpropagate from a scalar; accumulates into reachable .grad buffers."""
        if self.data.size != 1:
            raise ValueError(f"backward() requires a scalar loss, got shape {self.shape}")
        topo: list[Tensor] = []
        visited = set()
        stack = [(self, False)]
        while stack:  # iterative DFS; graphs can exceed the recursion limit
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in visited:
                    stack.append((p, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)
            if node._parents:  # free intermediates and release the graph
                node.grad = None
                node._backward = None
                node._parents = ()

    # ------------------------------------------------------------- arithmetic

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(_as_tensor(other, self.dtype), self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(_as_tensor(other, self.dtype), self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __pow__(self, p):
        return power(self, p)

    def __getitem__(self, key):
        return getitem(self, key)

    # ---------------------------------------------------------------- methods

    def reshape(self, *shape):
        return reshape(self, shape if len(shape) > 1 or isinstance(shape[0], int) else shape[0])

    def transpose(self, *axes):
        return transpose(self, axes or None)

    @property
    def T(self):
        return transpose(self, None)

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis, keepdims)

    def mean(self, axis=None, keepdims=False):
        return tmean(self, axis, keepdims)

    def relu(self):
        return relu(self)

    def tanh(self):
        return tanh(self)

    def exp(self):
        return exp(self)

    def log(self):
        return log(self)


def _as_tensor(x, dtype=None) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=dtype if dtype is not None else np.float32))


def _make(data: np.ndarray, parents: Sequence[Tensor], backward) -> Tensor:
    out = Tensor(data)
    if _grad_enabled and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
    return out


# ------------------------------------------------------------- elementwise ops


def add(a, b):
    a, b = _as_tensor(a), _as_tensor(b)

    def back(g):
        if a.requires_grad:
            a.accumulate_grad(_sum_to_shape(g, a.shape))
        if b.requires_grad:
            b.accumulate_grad(_sum_to_shape(g, b.shape))

    return _make(a.data + b.data, (a, b), back)


def sub(a, b):
    a, b = _as_tensor(a), _as_tensor(b)

    def back(g):
        if a.requires_grad:
            a.accumulate_grad(_sum_to_shape(g, a.shape))
        if b.requires_grad:
            b.accumulate_grad(_sum_to_shape(-g, b.shape))

    return _make(a.data - b.data, (a, b), back)


def mul(a, b):
    a, b = _as_tensor(a), _as_tensor(b)

    def back(g):
        if a.requires_grad:
            a.accumulate_grad(_sum_to_shape(g * b.data, a.shape))
        if b.requires_grad:
            b.accumulate_grad(_sum_to_shape(g * a.data, b.shape))

    return _make(a.data * b.data, (a, b), back)


def div(a, b):
    a, b = _as_tensor(a), _as_tensor(b)

    def back(g):
        if a.requires_grad:
            a.accumulate_grad(_sum_to_shape(g / b.data, a.shape))
        if b.requires_grad:
            b.accumulate_grad(_sum_to_shape(-g * a.data / (b.data * b.data), b.shape))

    return _make(a.data / b.data, (a, b), back)


def neg(a):
    a = _as_tensor(a)

    def back(g):
        if a.requires_grad:
            a.accumulate_grad(-g)

    return _make(-a.data, (a,), back)


def power(a, p):
    a = _as_tensor(a)
    p = float(p)

    def back(g):
        if a.requires_grad:
            a.accumulate_grad(g * p * a.data ** (p - 1.0))

    return _make(a.data**p, (a,), back)


def minimum(a, b):
    """Elementwise min; gradient routed to the smaller operand (ties -> first)."""
    a, b = _as_tensor(a), _as_tensor(b)
    take_a = a.data <= b.data

    def back(g):
        if a.requires_grad:
            a.accumulate_grad(_sum_to_shape(g * take_a, a.shape))
        if b.requires_grad:
            b.accumulate_grad(_sum_to_shape(g * ~take_a, b.shape))

    return _make(np.where(take_a, a.data, b.data), (a, b), back)


def maximum(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    take_a = a.data >= b.data

    def back(g):
        if a.requires_grad:
            a.accumulate_grad(_sum_to_shape(g * take_a, a.shape))
        if b.requires_grad:
            b.accumulate_grad(_sum_to_shape(g * ~take_a, b.shape))

    return _make(np.where(take_a, a.data, b.data), (a, b), back)


def relu(a):
    a = _as_tensor(a)
    out_data = np.maximum(a.data, 0)

    def back(g):
        if a.requires_grad:
            a.accumulate_grad(g * (out_data > 0))

    return _make(out_data, (a,), back)


def tanh(a):
    a = _as_tensor(a)
    out_data = np.tanh(a.data)

    def back(g):
        if a.requires_grad:
            a.accumulate_grad(g * (1.0 - out_data * out_data))

    return _make(out_data, (a,), back)


def exp(a):
    a = _as_tensor(a)
    out_data = np.exp(a.data)

    def back(g):
        if a.requires_grad:
            a.accumulate_grad(g * out_data)

    return _make(out_data, (a,), back)


def log(a):
    """log(max(x, EPS)); zero slope below the guard."""
    a = _as_tensor(a)
    guarded = np.maximum(a.data, EPS)

    def back(g):
        if a.requires_grad:
            a.accumulate_grad(g * (a.data > EPS) / guarded)

    return _make(np.log(guarded), (a,), back)


def softplus(a):
    """log(1 + e^x), computed without overflow."""
    a = _as_tensor(a)
    out_data = np.maximum(a.data, 0) + np.log1p(np.exp(-np.abs(a.data)))

    def back(g):
        if a.requires_grad:
            sig = 1.0 / (1.0 + np.exp(-a.data))
            a.accumulate_grad(g * sig)

    return _make(out_data, (a,), back)


# ------------------------------------------------------------ linear algebra


def matmul(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError(f"matmul expects 2-d operands, got {a.shape} @ {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul dimension mismatch: {a.shape} @ {b.shape}")

    def back(g):
        if a.requires_grad:
            a.accumulate_grad(g @ b.data.T)
        if b.requires_grad:
            b.accumulate_grad(a.data.T @ g)

    return _make(a.data @ b.data, (a, b), back)


# ------------------------------------------------------------------ reductions


def tsum(a, axis=None, keepdims=False):
    a = _as_tensor(a)

    def back(g):
        if not a.requires_grad:
            return
        if axis is None:
            a.accumulate_grad(np.broadcast_to(g, a.shape))
        else:
            if not keepdims:
                g = np.expand_dims(g, axis)
            a.accumulate_grad(np.broadcast_to(g, a.shape))

    return _make(a.data.sum(axis=axis, keepdims=keepdims), (a,), back)


def tmean(a, axis=None, keepdims=False):
    a = _as_tensor(a)
    if axis is None:
        count = a.data.size
    else:
        count = np.prod([a.shape[ax] for ax in (axis if isinstance(axis, tuple) else (axis,))])

    def back(g):
        if not a.requires_grad:
            return
        if axis is None:
            a.accumulate_grad(np.broadcast_to(g / count, a.shape))
        else:
            gg = g if keepdims else np.expand_dims(g, axis)
            a.accumulate_grad(np.broadcast_to(gg / count, a.shape))

    return _make(a.data.mean(axis=axis, keepdims=keepdims), (a,), back)


# ---------------------------------------------------------------- shape ops


def reshape(a, shape):
    a = _as_tensor(a)
    old_shape = a.shape

    def back(g):
        if a.requires_grad:
            a.accumulate_grad(g.reshape(old_shape))

    return _make(a.data.reshape(shape), (a,), back)


def transpose(a, axes=None):
    a = _as_tensor(a)
    if axes is None:
        inv = None
    else:
        inv = np.argsort(axes)

    def back(g):
        if a.requires_grad:
            a.accumulate_grad(g.transpose(inv) if inv is not None else g.transpose())

    return _make(a.data.transpose(axes) if axes is not None else a.data.transpose(), (a,), back)


def concat(tensors: Iterable[Tensor], axis: int = 0):
    ts = [_as_tensor(t) for t in tensors]
    sizes = [t.shape[axis] for t in ts]
    offsets = np.cumsum([0] + sizes)

    def back(g):
        for t, lo, hi in zip(ts, offsets[:-1], offsets[1:]):
            if t.requires_grad:
                idx = [slice(None)] * g.ndim
                idx[axis] = slice(lo, hi)
                t.accumulate_grad(g[tuple(idx)])

    return _make(np.concatenate([t.data for t in ts], axis=axis), ts, back)


def getitem(a, key):
    a = _as_tensor(a)

    def back(g):
        if a.requires_grad:
            full = np.zeros_like(a.data)
            full[key] = g
            a.accumulate_grad(full)

    return _make(a.data[key], (a,), back)


def pad2d(a, pad: int):
    """Zero-pad the last two axes by `pad` on every side."""
    a = _as_tensor(a)
    if pad == 0:
        return a
    widths = [(0, 0)] * (a.ndim - 2) + [(pad, pad), (pad, pad)]

    def back(g):
        if a.requires_grad:
            sl = (slice(None),) * (a.ndim - 2) + (slice(pad, -pad), slice(pad, -pad))
            a.accumulate_grad(g[sl])

    return _make(np.pad(a.data, widths), (a,), back)


# --------------------------------------------------------------- fused layers


def softmax(a, axis: int = -1):
    """Numerically stable softmax along `axis` (max-subtracted)."""
    a = _as_tensor(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out_data = e / e.sum(axis=axis, keepdims=True)

    def back(g):
        if a.requires_grad:
            dot = (g * out_data).sum(axis=axis, keepdims=True)
            a.accumulate_grad(out_data * (g - dot))

    return _make(out_data, (a,), back)


def l2_normalize(a, axis: int = -1):
    """x / max(||x||_2, EPS) along `axis`."""
    a = _as_tensor(a)
    norm = np.sqrt((a.data * a.data).sum(axis=axis, keepdims=True))
    denom = np.maximum(norm, EPS)
    out_data = a.data / denom

    def back(g):
        if a.requires_grad:
            active = norm > EPS  # below the guard the map is x/EPS, which is linear
            dot = (g * out_data).sum(axis=axis, keepdims=True)
            a.accumulate_grad((g - active * out_data * dot) / denom)

    return _make(out_data, (a,), back)


def layernorm(a, gamma, beta, eps: float = 1e-5):
    """Layer normalization over the last axis with learned scale/shift."""
    a, gamma, beta = _as_tensor(a), _as_tensor(gamma), _as_tensor(beta)
    mu = a.data.mean(axis=-1, keepdims=True)
    xc = a.data - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    out_data = xhat * gamma.data + beta.data

    def back(g):
        if gamma.requires_grad:
            gamma.accumulate_grad(_sum_to_shape(g * xhat, gamma.shape))
        if beta.requires_grad:
            beta.accumulate_grad(_sum_to_shape(g, beta.shape))
        if a.requires_grad:
            dxhat = g * gamma.data
            m1 = dxhat.mean(axis=-1, keepdims=True)
            m2 = (dxhat * xhat).mean(axis=-1, keepdims=True)
            a.accumulate_grad((dxhat - m1 - xhat * m2) * inv)

    return _make(out_data, (a, gamma, beta), back)


# --------------------------------------------------------------- convolution


def _conv_windows(x: np.ndarray, kh: int, kw: int, stride: int) -> np.ndarray:
    """(B,C,H,W) -> strided view (B,C,OH,OW,kh,kw), valid padding."""
    b, c, h, w = x.shape
    oh = (h - kh) // stride + 1
    ow = (w - kw) // stride + 1
    sb, sc, sh, sw = x.strides
    return np.lib.stride_tricks.as_strided(
        x,
        shape=(b, c, oh, ow, kh, kw),
        strides=(sb, sc, sh * stride, sw * stride, sh, sw),
        writeable=False,
    )


def conv2d(x, w, b=None, stride: int = 1):
    """Valid 2-d cross-correlation: x (B,C,H,W), w (O,C,kh,kw), b (O,)."""
    x, w = _as_tensor(x), _as_tensor(w)
    if x.ndim != 4 or w.ndim != 4:
        raise ValueError(f"conv2d expects 4-d input and kernel, got {x.shape}, {w.shape}")
    if x.shape[1] != w.shape[1]:
        raise ValueError(f"conv2d channel mismatch: input {x.shape} vs kernel {w.shape}")
    bsz, cin, h, wd = x.shape
    cout, _, kh, kw = w.shape
    if h < kh or wd < kw:
        raise ValueError(f"conv2d input {x.shape} smaller than kernel {w.shape}")
    windows = _conv_windows(np.ascontiguousarray(x.data), kh, kw, stride)
    oh, ow = windows.shape[2], windows.shape[3]
    # one GEMM: (B*OH*OW, C*kh*kw) @ (C*kh*kw, O)
    col = windows.transpose(0, 2, 3, 1, 4, 5).reshape(bsz * oh * ow, cin * kh * kw)
    out_data = (col @ w.data.reshape(cout, -1).T).reshape(bsz, oh, ow, cout).transpose(0, 3, 1, 2)
    parents = [x, w]
    if b is not None:
        b = _as_tensor(b)
        out_data = out_data + b.data.reshape(1, cout, 1, 1)
        parents.append(b)

    def back(g):
        gmat = g.transpose(0, 2, 3, 1).reshape(bsz * oh * ow, cout)
        if b is not None and b.requires_grad:
            b.accumulate_grad(gmat.sum(axis=0))
        if w.requires_grad:
            gw = gmat.T @ col
            w.accumulate_grad(gw.reshape(cout, cin, kh, kw))
        if x.requires_grad:
            gcol = gmat @ w.data.reshape(cout, -1)  # (B*OH*OW, C*kh*kw)
            gx = np.zeros_like(x.data)
            gwin = gcol.reshape(bsz, oh, ow, cin, kh, kw)
            for i in range(kh):  # col2im: scatter-add per kernel offset
                for j in range(kw):
                    gx[:, :, i : i + oh * stride : stride, j : j + ow * stride : stride] += (
                        gwin[:, :, :, :, i, j].transpose(0, 3, 1, 2)
                    )
            x.accumulate_grad(gx)

    return _make(out_data, parents, back)
