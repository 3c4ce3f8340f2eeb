"""Dense tensor math, reverse-mode gradients, AdamW, and the LR schedule."""

from .tensor import (
    PROB_FLOOR,
    GradTape,
    Tensor,
    add,
    as_tensor,
    backward,
    concat,
    cross_entropy,
    default_dtype,
    dropout,
    gather_positions,
    gelu,
    layer_norm,
    matmul,
    mul,
    narrow,
    reduce_max,
    reshape,
    set_default_dtype,
    softmax,
    stack,
    sub,
    take,
    tmean,
    transpose,
    tsum,
)
from .optim import (
    LrSchedule,
    OptimizerState,
    adam_step,
    adamw_step,
    clip_grad_norm,
    grads_of,
    lr_at,
    zero_grads,
)

__all__ = [
    "PROB_FLOOR",
    "GradTape",
    "Tensor",
    "add",
    "as_tensor",
    "backward",
    "concat",
    "cross_entropy",
    "default_dtype",
    "dropout",
    "gather_positions",
    "gelu",
    "layer_norm",
    "matmul",
    "mul",
    "narrow",
    "reduce_max",
    "reshape",
    "set_default_dtype",
    "softmax",
    "stack",
    "sub",
    "take",
    "tmean",
    "transpose",
    "tsum",
    "LrSchedule",
    "OptimizerState",
    "adam_step",
    "adamw_step",
    "clip_grad_norm",
    "grads_of",
    "lr_at",
    "zero_grads",
]
