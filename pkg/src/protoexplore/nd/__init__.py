"""Minimal tensor library: reverse-mode autodiff, layers, Adam, checkpoints."""

from .tensor import (
    EPS,
    Tensor,
    add,
    concat,
    conv2d,
    div,
    exp,
    getitem,
    grad_enabled,
    l2_normalize,
    layernorm,
    log,
    matmul,
    maximum,
    minimum,
    mul,
    neg,
    no_grad,
    pad2d,
    power,
    relu,
    reshape,
    softmax,
    softplus,
    sub,
    tanh,
    tmean,
    tsum,
    transpose,
)
from .nn import (
    Conv2d,
    ConvEncoder,
    LayerNorm,
    Linear,
    MLP,
    Module,
    TrunkHead,
    conv_out_hw,
    ema_update,
    uniform_fan_in,
)
from .optim import Adam, MissingGradError
from .serialize import (
    CheckpointError,
    blob_to_text,
    read_checkpoint,
    text_to_blob,
    write_checkpoint,
)
from .gradcheck import check_gradients, finite_difference_grads

__all__ = [
    "EPS",
    "Tensor",
    "no_grad",
    "grad_enabled",
    "add",
    "sub",
    "mul",
    "div",
    "neg",
    "power",
    "matmul",
    "conv2d",
    "relu",
    "tanh",
    "exp",
    "log",
    "softplus",
    "softmax",
    "l2_normalize",
    "layernorm",
    "minimum",
    "maximum",
    "tsum",
    "tmean",
    "reshape",
    "transpose",
    "concat",
    "getitem",
    "pad2d",
    "Module",
    "Linear",
    "Conv2d",
    "LayerNorm",
    "MLP",
    "ConvEncoder",
    "TrunkHead",
    "conv_out_hw",
    "ema_update",
    "uniform_fan_in",
    "Adam",
    "MissingGradError",
    "write_checkpoint",
    "read_checkpoint",
    "text_to_blob",
    "blob_to_text",
    "CheckpointError",
    "check_gradients",
    "finite_difference_grads",
]
