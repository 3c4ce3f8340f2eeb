"""Dense tensors with reverse-mode automatic differentiation.

A ``Tensor`` wraps a numpy array. Primitive operations compute their result
eagerly and, when a ``GradTape`` is active and an input requires gradients,
append a vector-Jacobian callback to the tape. ``GradTape.backward`` replays
the recorded nodes once, in reverse creation order, which is a valid
topological order because every input to a node exists before the node.

float64 is the default element type; switch to float32 with
``set_default_dtype`` when training speed matters more than tight gradient
checks.
"""

from __future__ import annotations

import threading

import numpy as np
from scipy.special import erf

from ..errors import NumericError, TapeError

_DEFAULT_DTYPE = np.float64

# Probability floor inside log() so saturated predictions stay finite.
PROB_FLOOR = 1e-12


def set_default_dtype(dtype) -> None:
    """Set the element type used for newly created tensors."""
    global _DEFAULT_DTYPE
    dtype = np.dtype(dtype)
    if dtype not in (np.dtype(np.float32), np.dtype(np.float64)):
        raise ValueError(f"unsupported dtype {dtype}; use float32 or float64")
    _DEFAULT_DTYPE = dtype.type


def default_dtype():
    return _DEFAULT_DTYPE


class Tensor:
    """N-dimensional array plus an accumulated gradient.

    Tensors created directly (parameters, inputs) allocate a zero gradient
    up front when ``requires_grad`` is set, so a parameter that never
    participates in a computation reports an exactly-zero gradient.
    Tensors produced by operations allocate their gradient lazily during
    the backward pass.
    """

    __slots__ = ("data", "grad", "requires_grad")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        self.data = np.asarray(data, dtype=dtype or _DEFAULT_DTYPE)
        self.requires_grad = bool(requires_grad)
        self.grad = np.zeros_like(self.data) if self.requires_grad else None

    @classmethod
    def _result(cls, data: np.ndarray, requires_grad: bool) -> "Tensor":
        out = cls.__new__(cls)
        out.data = data
        out.requires_grad = requires_grad
        out.grad = None
        return out

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self) -> None:
        if self.requires_grad:
            if self.grad is None:
                self.grad = np.zeros_like(self.data)
            else:
                self.grad[...] = 0.0

    def detach(self) -> "Tensor":
        return Tensor._result(self.data, False)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    # Arithmetic sugar; the module-level functions do the real work.
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


class _TapeStack(threading.local):
    def __init__(self):
        self.stack: list["GradTape"] = []


_ACTIVE = _TapeStack()


class GradTape:
    """Ordered record of primitive operations for one backward pass.

    Use as a context manager around the forward computation, then call
    ``backward(loss)`` exactly once. Each recorded node is visited exactly
    once; nodes that do not lie on a path to the loss are skipped, so
    parameters off the path keep their zero gradient. The active-tape stack
    is thread-local: concurrent evaluation contexts each own their tape.
    """

    def __init__(self):
        self._nodes: list[tuple[Tensor, object]] = []
        self._consumed = False

    def __enter__(self) -> "GradTape":
        _ACTIVE.stack.append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        popped = _ACTIVE.stack.pop()
        assert popped is self, "mismatched GradTape nesting"

    def __len__(self) -> int:
        return len(self._nodes)

    def backward(self, loss: Tensor, seed_grad=None) -> None:
        """Accumulate d(loss)/d(input) into every participating tensor."""
        if self._consumed:
            raise TapeError("tape already consumed; build a new tape per step")
        self._consumed = True
        if seed_grad is None:
            if loss.data.size != 1:
                raise ValueError(
                    f"backward without seed_grad needs a scalar loss, got shape {loss.data.shape}"
                )
            seed_grad = np.ones_like(loss.data)
        _accumulate(loss, np.asarray(seed_grad, dtype=loss.data.dtype))
        for out, backward_fn in reversed(self._nodes):
            if out.grad is None:
                continue
            backward_fn(out.grad)


def backward(loss: Tensor, tape: GradTape) -> None:
    """Run the backward pass of ``tape`` seeded at scalar ``loss``."""
    tape.backward(loss)


def _accumulate(t: Tensor, g: np.ndarray) -> None:
    if t.grad is None:
        t.grad = g.astype(t.data.dtype, copy=True)
    else:
        t.grad += g


def _record(out: Tensor, backward_fn) -> None:
    if _ACTIVE.stack and out.requires_grad:
        _ACTIVE.stack[-1]._nodes.append((out, backward_fn))


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum ``g`` down to ``shape``, inverting numpy broadcasting."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


# ---------------------------------------------------------------------------
# elementwise and linear-algebra primitives
# ---------------------------------------------------------------------------


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    req = a.requires_grad or b.requires_grad
    out = Tensor._result(a.data + b.data, req)

    def bwd(g):
        if a.requires_grad:
            _accumulate(a, _unbroadcast(g, a.data.shape))
        if b.requires_grad:
            _accumulate(b, _unbroadcast(g, b.data.shape))

    _record(out, bwd)
    return out


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    req = a.requires_grad or b.requires_grad
    out = Tensor._result(a.data - b.data, req)

    def bwd(g):
        if a.requires_grad:
            _accumulate(a, _unbroadcast(g, a.data.shape))
        if b.requires_grad:
            _accumulate(b, _unbroadcast(-g, b.data.shape))

    _record(out, bwd)
    return out


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    req = a.requires_grad or b.requires_grad
    out = Tensor._result(a.data * b.data, req)

    def bwd(g):
        if a.requires_grad:
            _accumulate(a, _unbroadcast(g * b.data, a.data.shape))
        if b.requires_grad:
            _accumulate(b, _unbroadcast(g * a.data, b.data.shape))

    _record(out, bwd)
    return out


def matmul(a, b) -> Tensor:
    """Matrix product with numpy semantics (batched stacks, 1-D vectors)."""
    a, b = as_tensor(a), as_tensor(b)
    ka = a.data.shape[-1] if a.data.ndim else None
    kb = b.data.shape[-2] if b.data.ndim >= 2 else (b.data.shape[-1] if b.data.ndim else None)
    if a.data.ndim == 0 or b.data.ndim == 0 or ka != kb:
        raise ValueError(f"matmul shape mismatch: {a.data.shape} x {b.data.shape}")
    out_data = np.matmul(a.data, b.data)
    req = a.requires_grad or b.requires_grad
    out = Tensor._result(out_data, req)

    a_vec = a.data.ndim == 1
    b_vec = b.data.ndim == 1

    def bwd(g):
        # Promote 1-D operands to matrices so one transpose rule covers all.
        g2 = g
        if a_vec and b_vec:
            g2 = g2.reshape(1, 1)
        elif a_vec:
            g2 = np.expand_dims(g2, axis=-2)
        elif b_vec:
            g2 = np.expand_dims(g2, axis=-1)
        a2 = a.data.reshape(1, -1) if a_vec else a.data
        b2 = b.data.reshape(-1, 1) if b_vec else b.data
        if a.requires_grad:
            ga = np.matmul(g2, np.swapaxes(b2, -1, -2))
            _accumulate(a, _unbroadcast(ga, a2.shape).reshape(a.data.shape))
        if b.requires_grad:
            gb = np.matmul(np.swapaxes(a2, -1, -2), g2)
            _accumulate(b, _unbroadcast(gb, b2.shape).reshape(b.data.shape))

    _record(out, bwd)
    return out


def gelu(a) -> Tensor:
    """Gaussian error linear unit, exact erf form."""
    a = as_tensor(a)
    x = a.data
    cdf = 0.5 * (1.0 + erf(x / np.sqrt(2.0)))
    out = Tensor._result(x * cdf, a.requires_grad)

    def bwd(g):
        pdf = np.exp(-0.5 * x * x) / np.sqrt(2.0 * np.pi)
        _accumulate(a, g * (cdf + x * pdf))

    _record(out, bwd)
    return out


# ---------------------------------------------------------------------------
# shape manipulation
# ---------------------------------------------------------------------------


def reshape(a, shape) -> Tensor:
    a = as_tensor(a)
    out = Tensor._result(a.data.reshape(shape), a.requires_grad)

    def bwd(g):
        _accumulate(a, g.reshape(a.data.shape))

    _record(out, bwd)
    return out


def transpose(a, axes=None) -> Tensor:
    a = as_tensor(a)
    if axes is None:
        axes = tuple(reversed(range(a.data.ndim)))
    out = Tensor._result(np.transpose(a.data, axes), a.requires_grad)
    inverse = np.argsort(axes)

    def bwd(g):
        _accumulate(a, np.transpose(g, inverse))

    _record(out, bwd)
    return out


def narrow(a, axis: int, start: int, length: int) -> Tensor:
    """Contiguous slice of ``length`` entries along ``axis``."""
    a = as_tensor(a)
    index = [slice(None)] * a.data.ndim
    index[axis] = slice(start, start + length)
    index = tuple(index)
    out = Tensor._result(a.data[index], a.requires_grad)

    def bwd(g):
        full = np.zeros_like(a.data)
        full[index] = g
        _accumulate(a, full)

    _record(out, bwd)
    return out


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    req = any(t.requires_grad for t in tensors)
    out = Tensor._result(np.concatenate([t.data for t in tensors], axis=axis), req)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def bwd(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            if t.requires_grad:
                index = [slice(None)] * g.ndim
                index[axis] = slice(lo, hi)
                _accumulate(t, g[tuple(index)])

    _record(out, bwd)
    return out


def stack(tensors, axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    req = any(t.requires_grad for t in tensors)
    out = Tensor._result(np.stack([t.data for t in tensors], axis=axis), req)

    def bwd(g):
        for i, t in enumerate(tensors):
            if t.requires_grad:
                _accumulate(t, np.take(g, i, axis=axis))

    _record(out, bwd)
    return out


# ---------------------------------------------------------------------------
# gathers
# ---------------------------------------------------------------------------


def take(a, indices, axis: int = 0) -> Tensor:
    """Row gather along axis 0 (embedding lookup): out[i...] = a[indices[i...]]."""
    a = as_tensor(a)
    if axis != 0:
        raise ValueError("take only supports axis=0")
    idx = np.asarray(indices)
    out = Tensor._result(np.take(a.data, idx, axis=0), a.requires_grad)

    def bwd(g):
        full = np.zeros_like(a.data)
        np.add.at(full, idx, g)
        _accumulate(a, full)

    _record(out, bwd)
    return out


def gather_positions(a, positions) -> Tensor:
    """Per-row gather: out[i] = a[i, positions[i]] for a of shape [B, L, ...]."""
    a = as_tensor(a)
    pos = np.asarray(positions)
    batch = np.arange(a.data.shape[0])
    out = Tensor._result(a.data[batch, pos], a.requires_grad)

    def bwd(g):
        full = np.zeros_like(a.data)
        np.add.at(full, (batch, pos), g)
        _accumulate(a, full)

    _record(out, bwd)
    return out


# ---------------------------------------------------------------------------
# reductions
# ---------------------------------------------------------------------------


def _expand_reduced(g, src_shape, axis, keepdims):
    if axis is None:
        return np.broadcast_to(g, src_shape)
    if not keepdims:
        g = np.expand_dims(g, axis)
    return np.broadcast_to(g, src_shape)


def tsum(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    out = Tensor._result(a.data.sum(axis=axis, keepdims=keepdims), a.requires_grad)

    def bwd(g):
        _accumulate(a, _expand_reduced(g, a.data.shape, axis, keepdims).astype(a.data.dtype))

    _record(out, bwd)
    return out


def tmean(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    out = Tensor._result(a.data.mean(axis=axis, keepdims=keepdims), a.requires_grad)
    count = a.data.size if axis is None else a.data.shape[axis]

    def bwd(g):
        _accumulate(a, _expand_reduced(g, a.data.shape, axis, keepdims) / count)

    _record(out, bwd)
    return out


def reduce_max(a, axis: int) -> Tensor:
    """Maximum along one axis; gradient flows to the first argmax on ties."""
    a = as_tensor(a)
    out = Tensor._result(a.data.max(axis=axis), a.requires_grad)
    argmax = np.argmax(a.data, axis=axis)

    def bwd(g):
        full = np.zeros_like(a.data)
        idx = list(np.indices(argmax.shape))
        idx.insert(axis % a.data.ndim, argmax)
        full[tuple(idx)] = g
        _accumulate(a, full)

    _record(out, bwd)
    return out


# ---------------------------------------------------------------------------
# probability primitives
# ---------------------------------------------------------------------------


def softmax(a, axis: int = -1) -> Tensor:
    """Numerically stabilized softmax along ``axis``.

    Rejects non-finite input: upstream code must mask, not poison.
    """
    a = as_tensor(a)
    if not np.isfinite(a.data).all():
        raise NumericError("softmax input contains NaN or Inf")
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=axis, keepdims=True)
    out = Tensor._result(s, a.requires_grad)

    def bwd(g):
        inner = (g * s).sum(axis=axis, keepdims=True)
        _accumulate(a, s * (g - inner))

    _record(out, bwd)
    return out


def cross_entropy(p, q) -> Tensor:
    """Negative log-likelihood of class ``q`` under probabilities ``p``.

    ``p`` is a probability vector (scalar loss) or a [B, n] batch with ``q``
    a length-B index vector (per-example losses). The probability is floored
    at PROB_FLOOR inside the log so a saturated wrong prediction stays finite.
    """
    p = as_tensor(p)
    n = p.data.shape[-1]
    if p.data.ndim == 1:
        q_idx = int(q)
        if not 0 <= q_idx < n:
            raise IndexError(f"gold index {q_idx} out of range for {n} classes")
        picked = p.data[q_idx]
        clamped = max(picked, PROB_FLOOR)
        out = Tensor._result(np.asarray(-np.log(clamped), dtype=p.data.dtype), p.requires_grad)

        def bwd(g):
            full = np.zeros_like(p.data)
            full[q_idx] = -g / clamped
            _accumulate(p, full)

        _record(out, bwd)
        return out

    if p.data.ndim == 2:
        q_idx = np.asarray(q, dtype=np.intp)
        if q_idx.ndim != 1 or q_idx.shape[0] != p.data.shape[0]:
            raise ValueError(
                f"gold indices shape {q_idx.shape} does not match batch {p.data.shape}"
            )
        if (q_idx < 0).any() or (q_idx >= n).any():
            raise IndexError(f"gold index out of range for {n} classes")
        rows = np.arange(p.data.shape[0])
        picked = np.maximum(p.data[rows, q_idx], PROB_FLOOR)
        out = Tensor._result(-np.log(picked), p.requires_grad)

        def bwd(g):
            full = np.zeros_like(p.data)
            full[rows, q_idx] = -g / picked
            _accumulate(p, full)

        _record(out, bwd)
        return out

    raise ValueError(f"cross_entropy expects 1-D or 2-D probabilities, got {p.data.shape}")


def layer_norm(a, gain, bias, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to zero mean / unit variance, then scale and shift."""
    a, gain, bias = as_tensor(a), as_tensor(gain), as_tensor(bias)
    x = a.data
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    sigma = np.sqrt(var + eps)
    xhat = (x - mu) / sigma
    req = a.requires_grad or gain.requires_grad or bias.requires_grad
    out = Tensor._result(xhat * gain.data + bias.data, req)

    def bwd(g):
        if gain.requires_grad:
            _accumulate(gain, _unbroadcast(g * xhat, gain.data.shape))
        if bias.requires_grad:
            _accumulate(bias, _unbroadcast(g, bias.data.shape))
        if a.requires_grad:
            gx = g * gain.data
            m1 = gx.mean(axis=-1, keepdims=True)
            m2 = (gx * xhat).mean(axis=-1, keepdims=True)
            _accumulate(a, (gx - m1 - xhat * m2) / sigma)

    _record(out, bwd)
    return out


def dropout(a, rate: float, rng: np.random.Generator) -> Tensor:
    """Inverted dropout; identity when rate == 0."""
    a = as_tensor(a)
    if rate == 0.0:
        return a
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    keep = (rng.random(a.data.shape) >= rate) / (1.0 - rate)
    out = Tensor._result(a.data * keep, a.requires_grad)

    def bwd(g):
        _accumulate(a, g * keep)

    _record(out, bwd)
    return out
