"""The four prediction/loss paradigms over one shared encoder.

All four score an input vector h against a bank of per-class vectors with a
plain dot product, then softmax + cross-entropy. They differ only in where
h and the bank come from:

  fine_tune       h = [CLS] state of a non-prompted rendering; bank = rows of
                  a trainable classifier matrix, plus a bias.
  prompt_tune     h = mask state of the input-prompt; bank = trainable
                  virtual label embeddings.
  semantic_match  h = mask state; bank = pooled hidden states over each
                  label's name span inside its label-prompt.
  mask_match      h = mask state; bank = mask states of the label-prompts.

For the two matching paradigms the bank is recomputed through the current
encoder parameters every training step, so gradients reach the label side;
at evaluation time the bank is computed once and cached.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.stats import truncnorm

from .encoder import (
    EncoderConfig,
    INIT_STD,
    cls_state,
    cls_states_batch,
    forward_batch,
    mask_state,
    mask_states_batch,
    pad_batch,
    pooled_state,
)
from .errors import ContractError
from .numerics import (
    Tensor,
    add,
    cross_entropy,
    matmul,
    mul,
    narrow,
    reshape,
    softmax,
    stack,
    tmean,
    transpose,
)
from .tokenizer import TokenSequence

LOGIT_TIE_EPS = 1e-12


class ParadigmKind(str, Enum):
    FINE_TUNE = "fine_tune"
    PROMPT_TUNE = "prompt_tune"
    SEMANTIC_MATCH = "semantic_match"
    MASK_MATCH = "mask_match"


PARADIGM_CODES = {
    "ft": ParadigmKind.FINE_TUNE,
    "pt": ParadigmKind.PROMPT_TUNE,
    "sm": ParadigmKind.SEMANTIC_MATCH,
    "mm": ParadigmKind.MASK_MATCH,
}

_ENCODED_BANK_KINDS = (ParadigmKind.SEMANTIC_MATCH, ParadigmKind.MASK_MATCH)


@dataclass
class InputRepr:
    """The vector standing in for one input."""

    vector: Tensor
    kind: ParadigmKind


@dataclass
class LabelBank:
    """Per-class vectors [n, hidden_dim]; bias only for the classifier head."""

    vectors: Tensor
    bias: Tensor | None = None

    def __len__(self) -> int:
        return self.vectors.shape[0]


@dataclass
class Prediction:
    probabilities: np.ndarray
    argmax: int
    tie: bool


def init_head_params(kind: ParadigmKind, n_labels: int, hidden_dim: int,
                     rng: np.random.Generator) -> dict[str, Tensor]:
    """Trainable paradigm-specific parameters (empty for matching paradigms)."""
    def tn(shape):
        return truncnorm.rvs(-2.0, 2.0, scale=INIT_STD, size=shape, random_state=rng)

    if kind is ParadigmKind.FINE_TUNE:
        return {
            "head.weight": Tensor(tn((n_labels, hidden_dim)), requires_grad=True),
            "head.bias": Tensor(np.zeros(n_labels), requires_grad=True),
        }
    if kind is ParadigmKind.PROMPT_TUNE:
        return {"head.virtual": Tensor(tn((n_labels, hidden_dim)), requires_grad=True)}
    return {}


def input_repr(kind: ParadigmKind, H: Tensor, seq: TokenSequence) -> InputRepr:
    """Designated input vector: [CLS] state for fine_tune, mask state otherwise."""
    if kind is ParadigmKind.FINE_TUNE:
        if seq.mask_positions:
            raise ContractError("fine_tune consumes the non-prompted rendering")
        return InputRepr(vector=cls_state(H, seq), kind=kind)
    return InputRepr(vector=mask_state(H, seq), kind=kind)


def input_reprs_batch(kind: ParadigmKind, H: Tensor, seqs: list[TokenSequence]) -> Tensor:
    if kind is ParadigmKind.FINE_TUNE:
        return cls_states_batch(H, seqs)
    return mask_states_batch(H, seqs)


def label_bank(kind: ParadigmKind, label_seqs: list[TokenSequence],
               params: dict[str, Tensor], config: EncoderConfig,
               pool_mode: str = "max", pool_full_prompt: bool = False) -> LabelBank:
    """Build the per-class vector bank for ``kind``.

    ``label_seqs`` are the encoded label-prompts in canonical class order
    (unused by the two trainable-head paradigms). When called under an
    active tape the encoded banks participate in the backward pass.
    """
    if kind is ParadigmKind.FINE_TUNE:
        return LabelBank(vectors=params["head.weight"], bias=params["head.bias"])
    if kind is ParadigmKind.PROMPT_TUNE:
        return LabelBank(vectors=params["head.virtual"])

    ids, real = pad_batch(label_seqs)
    H = forward_batch(ids, params, config, real_mask=real)
    if kind is ParadigmKind.MASK_MATCH:
        return LabelBank(vectors=mask_states_batch(H, label_seqs))

    # semantic_match: pool each label's name span (or its whole prompt).
    length, dim = H.shape[1], H.shape[2]
    vectors = []
    for i, seq in enumerate(label_seqs):
        if pool_full_prompt or seq.name_span is None:
            span = (0, len(seq))
        else:
            span = seq.name_span
        row_i = reshape(narrow(H, 0, i, 1), (length, dim))
        vectors.append(pooled_state(row_i, span, mode=pool_mode))
    return LabelBank(vectors=stack(vectors, axis=0))


def _logits(h: Tensor, bank: LabelBank, temperature: float) -> Tensor:
    if h.shape[-1] != bank.vectors.shape[-1]:
        raise ContractError(
            f"width mismatch: input {h.shape[-1]} vs bank {bank.vectors.shape[-1]}"
        )
    z = matmul(h, transpose(bank.vectors))
    if bank.bias is not None:
        z = add(z, bank.bias)
    if temperature != 1.0:
        z = mul(z, 1.0 / temperature)
    return z


def predict(h: InputRepr | Tensor, bank: LabelBank,
            kind: ParadigmKind | None = None, temperature: float = 1.0) -> Prediction:
    """Softmax over dot products between h and every bank vector.

    Ties (top-2 logits closer than 1e-12) resolve to the lowest class index
    and raise the tie flag.
    """
    vec = h.vector if isinstance(h, InputRepr) else h
    z = _logits(vec.detach(), LabelBank(bank.vectors.detach(),
                                        None if bank.bias is None else bank.bias.detach()),
                temperature)
    logits = z.data
    probs = softmax(Tensor(logits)).data
    order = np.sort(logits)
    tie = len(logits) > 1 and (order[-1] - order[-2]) < LOGIT_TIE_EPS
    return Prediction(probabilities=probs, argmax=int(np.argmax(logits)), tie=tie)


def loss(h: InputRepr | Tensor, bank: LabelBank, gold,
         kind: ParadigmKind | None = None, temperature: float = 1.0) -> Tensor:
    """Cross-entropy of the softmax prediction against the gold class.

    ``h`` may be one vector with an integer gold, or a [B, hidden_dim] batch
    with a gold index per row (mean-reduced). Differentiable through both h
    and the bank when those were produced under the active tape.
    """
    vec = h.vector if isinstance(h, InputRepr) else h
    z = _logits(vec, bank, temperature)
    probs = softmax(z, axis=-1)
    ce = cross_entropy(probs, gold)
    if ce.data.ndim == 0:
        return ce
    return tmean(ce)
