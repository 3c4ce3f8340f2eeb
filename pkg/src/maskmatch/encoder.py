"""A small trainable masked-transformer encoder.

One parameter set encodes both prompted inputs and prompted labels; the
paradigm layer decides which hidden states to read (mask, [CLS], or pooled
name span). Pre-norm blocks with GELU feed-forward keep training stable at
small scale. Padded key positions receive an additive -1e9 before the
attention softmax, so appending [PAD] never changes real positions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import truncnorm

from .errors import ContractError, DataError
from .numerics import (
    Tensor,
    add,
    dropout,
    gather_positions,
    gelu,
    layer_norm,
    matmul,
    mul,
    narrow,
    reduce_max,
    reshape,
    softmax,
    take,
    tmean,
    transpose,
)
from .tokenizer import CLS_ID, PAD_ID, TokenSequence

INIT_STD = 0.02
ATTENTION_MASK_BIAS = -1e9

CHECKPOINT_MAGIC = b"MMCKPT v1\n"


@dataclass
class EncoderConfig:
    vocab_size: int
    layers: int = 2
    hidden_dim: int = 128
    heads: int = 4
    ffn_dim: int = 256
    max_positions: int = 512

    def __post_init__(self):
        if self.hidden_dim % self.heads != 0:
            raise ContractError(
                f"hidden_dim {self.hidden_dim} not divisible by heads {self.heads}"
            )

    @property
    def head_dim(self) -> int:
        return self.hidden_dim // self.heads

    def to_meta(self) -> dict:
        return {
            "vocab_size": self.vocab_size, "layers": self.layers,
            "hidden_dim": self.hidden_dim, "heads": self.heads,
            "ffn_dim": self.ffn_dim, "max_positions": self.max_positions,
        }

    @classmethod
    def from_meta(cls, meta: dict) -> "EncoderConfig":
        return cls(**{k: int(meta[k]) for k in (
            "vocab_size", "layers", "hidden_dim", "heads", "ffn_dim", "max_positions")})


def _trunc_normal(rng: np.random.Generator, shape) -> np.ndarray:
    return truncnorm.rvs(-2.0, 2.0, scale=INIT_STD, size=shape, random_state=rng)


def init_encoder_params(config: EncoderConfig, rng: np.random.Generator) -> dict[str, Tensor]:
    """Fresh trainable parameters: truncated-normal weights, zero biases, unit LN gains."""
    d, f = config.hidden_dim, config.ffn_dim
    params: dict[str, Tensor] = {
        "tok_emb": Tensor(_trunc_normal(rng, (config.vocab_size, d)), requires_grad=True),
        "pos_emb": Tensor(_trunc_normal(rng, (config.max_positions, d)), requires_grad=True),
    }
    for i in range(config.layers):
        p = f"layer{i}."
        for name in ("wq", "wk", "wv", "wo"):
            params[p + f"attn.{name}"] = Tensor(_trunc_normal(rng, (d, d)), requires_grad=True)
        for name in ("bq", "bk", "bv", "bo"):
            params[p + f"attn.{name}"] = Tensor(np.zeros(d), requires_grad=True)
        params[p + "attn_ln.gain"] = Tensor(np.ones(d), requires_grad=True)
        params[p + "attn_ln.bias"] = Tensor(np.zeros(d), requires_grad=True)
        params[p + "ffn.w1"] = Tensor(_trunc_normal(rng, (d, f)), requires_grad=True)
        params[p + "ffn.b1"] = Tensor(np.zeros(f), requires_grad=True)
        params[p + "ffn.w2"] = Tensor(_trunc_normal(rng, (f, d)), requires_grad=True)
        params[p + "ffn.b2"] = Tensor(np.zeros(d), requires_grad=True)
        params[p + "ffn_ln.gain"] = Tensor(np.ones(d), requires_grad=True)
        params[p + "ffn_ln.bias"] = Tensor(np.zeros(d), requires_grad=True)
    params["final_ln.gain"] = Tensor(np.ones(d), requires_grad=True)
    params["final_ln.bias"] = Tensor(np.zeros(d), requires_grad=True)
    return params


def pad_batch(seqs: list[TokenSequence]) -> tuple[np.ndarray, np.ndarray]:
    """Stack sequences into an id matrix padded with [PAD]; also return the pad mask."""
    length = max(len(s) for s in seqs)
    ids = np.full((len(seqs), length), PAD_ID, dtype=np.intp)
    for row, seq in enumerate(seqs):
        ids[row, : len(seq)] = seq.ids
    return ids, ids != PAD_ID


def forward_batch(ids: np.ndarray, params: dict[str, Tensor], config: EncoderConfig,
                  real_mask: np.ndarray | None = None,
                  attn_capture: list | None = None,
                  dropout_rate: float = 0.0,
                  dropout_rng: np.random.Generator | None = None) -> Tensor:
    """Hidden states [B, L, hidden_dim] for a padded id matrix.

    ``attn_capture``, when given, receives each layer's attention weights
    [B, heads, L, L] for inspection. Dropout (off by default) applies to the
    attention and feed-forward branch outputs before their residual adds.
    """
    B, L = ids.shape
    if L > config.max_positions:
        raise ContractError(f"sequence length {L} exceeds max_positions {config.max_positions}")
    if ids.min() < 0 or ids.max() >= config.vocab_size:
        raise ContractError(
            f"token id out of range [0, {config.vocab_size}): {ids.min()}..{ids.max()}"
        )
    d, heads, dh = config.hidden_dim, config.heads, config.head_dim

    x = add(take(params["tok_emb"], ids), narrow(params["pos_emb"], 0, 0, L))

    if real_mask is None:
        real_mask = ids != PAD_ID
    key_bias = Tensor(np.where(real_mask, 0.0, ATTENTION_MASK_BIAS)[:, None, None, :])

    for i in range(config.layers):
        p = f"layer{i}."
        h = layer_norm(x, params[p + "attn_ln.gain"], params[p + "attn_ln.bias"])
        q = add(matmul(h, params[p + "attn.wq"]), params[p + "attn.bq"])
        k = add(matmul(h, params[p + "attn.wk"]), params[p + "attn.bk"])
        v = add(matmul(h, params[p + "attn.wv"]), params[p + "attn.bv"])
        # [B, L, d] -> [B, heads, L, dh]
        q = transpose(reshape(q, (B, L, heads, dh)), (0, 2, 1, 3))
        k = transpose(reshape(k, (B, L, heads, dh)), (0, 2, 3, 1))
        v = transpose(reshape(v, (B, L, heads, dh)), (0, 2, 1, 3))
        scores = add(mul(matmul(q, k), 1.0 / np.sqrt(dh)), key_bias)
        attn = softmax(scores, axis=-1)
        if attn_capture is not None:
            attn_capture.append(attn.data)
        ctx = reshape(transpose(matmul(attn, v), (0, 2, 1, 3)), (B, L, d))
        out = add(matmul(ctx, params[p + "attn.wo"]), params[p + "attn.bo"])
        if dropout_rate > 0.0:
            out = dropout(out, dropout_rate, dropout_rng)
        x = add(x, out)
        h = layer_norm(x, params[p + "ffn_ln.gain"], params[p + "ffn_ln.bias"])
        f = gelu(add(matmul(h, params[p + "ffn.w1"]), params[p + "ffn.b1"]))
        f = add(matmul(f, params[p + "ffn.w2"]), params[p + "ffn.b2"])
        if dropout_rate > 0.0:
            f = dropout(f, dropout_rate, dropout_rng)
        x = add(x, f)

    return layer_norm(x, params["final_ln.gain"], params["final_ln.bias"])


def forward(seq: TokenSequence, params: dict[str, Tensor], config: EncoderConfig) -> Tensor:
    """Hidden states [len, hidden_dim] for one sequence."""
    ids = np.asarray([seq.ids], dtype=np.intp)
    H = forward_batch(ids, params, config)
    return reshape(H, (len(seq), config.hidden_dim))


def mask_state(H: Tensor, seq: TokenSequence, which: int = 0) -> Tensor:
    """Row of H at the ``which``-th [MASK] position."""
    if not seq.mask_positions:
        raise ContractError("sequence has no [MASK]; cannot take a mask state")
    if which >= len(seq.mask_positions):
        raise ContractError(
            f"mask index {which} out of range ({len(seq.mask_positions)} masks)"
        )
    pos = seq.mask_positions[which]
    return reshape(narrow(H, 0, pos, 1), (H.shape[-1],))


def pooled_state(H: Tensor, span: tuple[int, int], mode: str = "max") -> Tensor:
    """Coordinate-wise max (or mean) over the rows H[span[0]:span[1]]."""
    start, stop = span
    if stop <= start or start < 0 or stop > H.shape[0]:
        raise ContractError(f"empty or out-of-range span {span} for length {H.shape[0]}")
    rows = narrow(H, 0, start, stop - start)
    if mode == "max":
        return reduce_max(rows, axis=0)
    if mode == "mean":
        return tmean(rows, axis=0)
    raise ContractError(f"unknown pooling mode {mode!r}")


def cls_state(H: Tensor, seq: TokenSequence) -> Tensor:
    """Row 0 of H; the sequence must begin with [CLS]."""
    if not seq.ids or seq.ids[0] != CLS_ID:
        raise ContractError("sequence does not begin with [CLS]")
    assert 0 not in seq.mask_positions, "[CLS] and [MASK] may not share a position"
    return reshape(narrow(H, 0, 0, 1), (H.shape[-1],))


def mask_states_batch(H: Tensor, seqs: list[TokenSequence]) -> Tensor:
    """[B, hidden_dim] of single-mask states for a batch forward."""
    positions = np.asarray([s.single_mask() for s in seqs], dtype=np.intp)
    return gather_positions(H, positions)


def cls_states_batch(H: Tensor, seqs: list[TokenSequence]) -> Tensor:
    for s in seqs:
        if s.ids[0] != CLS_ID:
            raise ContractError("sequence does not begin with [CLS]")
    return reshape(narrow(H, 1, 0, 1), (H.shape[0], H.shape[2]))


# ---------------------------------------------------------------------------
# checkpoint file format
# ---------------------------------------------------------------------------
#
#   MMCKPT v1\n
#   key=value\n            (one per metadata entry, sorted)
#   \n                     (blank line ends the header)
#   tensor <name> <ndim> <dims...>\n
#   <raw little-endian float64, row major>
#   ...
#   end\n


def save_checkpoint(path, params: dict[str, Tensor], meta: dict) -> None:
    """Write parameters plus metadata; blocks are little-endian float64."""
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        for key in sorted(meta):
            value = str(meta[key])
            if "\n" in value or "=" in key:
                raise ContractError(f"checkpoint metadata {key!r} not representable")
            fh.write(f"{key}={value}\n".encode("utf-8"))
        fh.write(b"\n")
        for name, tensor in params.items():
            arr = np.ascontiguousarray(tensor.data, dtype="<f8")
            dims = " ".join(str(s) for s in arr.shape)
            fh.write(f"tensor {name} {arr.ndim}{' ' + dims if dims else ''}\n".encode("utf-8"))
            fh.write(arr.tobytes())
        fh.write(b"end\n")


def load_checkpoint(path) -> tuple[dict[str, Tensor], dict]:
    """Read a checkpoint back into trainable Tensors and its metadata dict."""
    from pathlib import Path

    if not Path(path).exists():
        raise DataError(f"checkpoint not found: {path}")
    with open(path, "rb") as fh:
        if fh.read(len(CHECKPOINT_MAGIC)) != CHECKPOINT_MAGIC:
            raise DataError(f"{path}: not a checkpoint file (bad magic)")
        meta: dict[str, str] = {}
        while True:
            line = fh.readline().decode("utf-8").rstrip("\n")
            if not line:
                break
            key, _, value = line.partition("=")
            meta[key] = value
        params: dict[str, Tensor] = {}
        while True:
            header = fh.readline().decode("utf-8").rstrip("\n")
            if header == "end":
                break
            if not header.startswith("tensor "):
                raise DataError(f"{path}: corrupt block header {header!r}")
            parts = header.split(" ")
            name, ndim = parts[1], int(parts[2])
            shape = tuple(int(s) for s in parts[3 : 3 + ndim])
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(count * 8)
            if len(raw) != count * 8:
                raise DataError(f"{path}: truncated block for {name}")
            arr = np.frombuffer(raw, dtype="<f8").reshape(shape)
            params[name] = Tensor(arr.copy(), requires_grad=True)
    return params, meta
