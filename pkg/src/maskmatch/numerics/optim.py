"""AdamW with decoupled weight decay, plain Adam, and the warmup/decay schedule."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import NumericError
from .tensor import Tensor

log = logging.getLogger(__name__)


@dataclass
class OptimizerState:
    """Per-parameter first/second moments plus shared hyperparameters."""

    lr: float = 1e-5
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.01
    step_count: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    def moments_for(self, name: str, param: np.ndarray):
        if name not in self.m:
            self.m[name] = np.zeros_like(param)
            self.v[name] = np.zeros_like(param)
        return self.m[name], self.v[name]


def _moment_update(params: dict, grads: dict, state: OptimizerState, lr: float) -> None:
    for name, g in grads.items():
        if not np.isfinite(g).all():
            raise NumericError(f"non-finite gradient for parameter '{name}'; step aborted")
    state.step_count += 1
    t = state.step_count
    bc1 = 1.0 - state.beta1**t
    bc2 = 1.0 - state.beta2**t
    for name, p in params.items():
        g = grads[name]
        m, v = state.moments_for(name, p.data)
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        p.data -= lr * ((m / bc1) / (np.sqrt(v / bc2) + state.eps))


def adamw_step(params: dict, grads: dict, state: OptimizerState, lr_t: float | None = None) -> None:
    """One decoupled-weight-decay Adam update, in place.

    ``params`` maps names to Tensors, ``grads`` maps the same names to
    gradient arrays. ``lr_t`` overrides ``state.lr`` for this step (the
    training loop passes the scheduled rate). A NaN/Inf gradient aborts the
    whole step before any parameter moves. With weight_decay == 0 the update
    is bit-identical to ``adam_step``.
    """
    lr = state.lr if lr_t is None else lr_t
    _moment_update(params, grads, state, lr)
    if state.weight_decay:
        for p in params.values():
            p.data -= lr * state.weight_decay * p.data


def adam_step(params: dict, grads: dict, state: OptimizerState, lr_t: float | None = None) -> None:
    """Textbook Adam: the same moment update with no decay term."""
    lr = state.lr if lr_t is None else lr_t
    _moment_update(params, grads, state, lr)


def clip_grad_norm(grads: dict, max_norm: float) -> float:
    """Scale all gradients so their global L2 norm is at most ``max_norm``."""
    total = 0.0
    for g in grads.values():
        total += float((g * g).sum())
    norm = float(np.sqrt(total))
    if max_norm > 0 and norm > max_norm:
        scale = max_norm / norm
        for g in grads.values():
            g *= scale
    return norm


@dataclass
class LrSchedule:
    """Linear warmup to ``peak_lr`` then linear decay to zero.

    warmup covers ``warmup_ratio`` of ``total_steps``; the rate is
    piecewise-linear and continuous, with lr(0) == 0 (when warming up)
    and lr(total_steps) == 0.
    """

    peak_lr: float
    warmup_ratio: float
    total_steps: int
    _clamp_warned: bool = field(default=False, repr=False)

    def __post_init__(self):
        if not 0.0 <= self.warmup_ratio <= 1.0:
            raise ValueError(f"warmup_ratio must be in [0, 1], got {self.warmup_ratio}")
        if self.total_steps < 1:
            raise ValueError(f"total_steps must be positive, got {self.total_steps}")

    @property
    def warmup_steps(self) -> int:
        return int(round(self.warmup_ratio * self.total_steps))


def lr_at(schedule: LrSchedule, step: int) -> float:
    """Learning rate at optimizer step ``step`` (0..total_steps)."""
    total = schedule.total_steps
    if step > total:
        if not schedule._clamp_warned:
            log.warning("lr_at called with step %d > total_steps %d; clamping to 0", step, total)
            schedule._clamp_warned = True
        return 0.0
    if step < 0:
        raise ValueError(f"step must be non-negative, got {step}")
    warm = schedule.warmup_steps
    if warm > 0 and step <= warm:
        return schedule.peak_lr * step / warm
    if total == warm:
        return schedule.peak_lr
    return schedule.peak_lr * (total - step) / (total - warm)


def grads_of(params: dict) -> dict:
    """Snapshot the accumulated gradient of every parameter."""
    return {name: p.grad if p.grad is not None else np.zeros_like(p.data) for name, p in params.items()}


def zero_grads(params: dict) -> None:
    for p in params.values():
        p.zero_grad()


__all__ = [
    "OptimizerState",
    "adamw_step",
    "adam_step",
    "clip_grad_norm",
    "LrSchedule",
    "lr_at",
    "grads_of",
    "zero_grads",
    "Tensor",
]
