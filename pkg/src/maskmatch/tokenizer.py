"""Word-level tokenization with a corpus-built vocabulary and reserved tokens.

One vocabulary serves both the input side and the label side, so label-name
words share embeddings with the same words appearing in inputs. Reserved
tokens occupy fixed low ids and survive save/load byte-exactly.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ContractError, DataError

PAD, UNK, CLS, SEP, MASK = "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"
E1_OPEN, E1_CLOSE, E2_OPEN, E2_CLOSE = "[E1]", "[/E1]", "[E2]", "[/E2]"

RESERVED_TOKENS = (PAD, UNK, CLS, SEP, MASK, E1_OPEN, E1_CLOSE, E2_OPEN, E2_CLOSE)
PAD_ID, UNK_ID, CLS_ID, SEP_ID, MASK_ID = 0, 1, 2, 3, 4

_RESERVED_SET = frozenset(RESERVED_TOKENS)

# Reserved markers first so "[MASK]" never splits into "[", "mask", "]".
_TOKEN_RE = re.compile(
    r"\[/?(?:PAD|UNK|CLS|SEP|MASK|E1|E2)\]|\w+|[^\w\s]"
)

DEFAULT_MAX_LEN = 500


def tokenize(text: str, lowercase: bool = True, split_punct: bool = True) -> list[str]:
    """Split text into word, punctuation, and reserved-marker tokens."""
    if split_punct:
        raw = _TOKEN_RE.findall(text)
    else:
        raw = text.split()
    if not lowercase:
        return raw
    return [t if t in _RESERVED_SET else t.lower() for t in raw]


@dataclass
class Vocab:
    """Bidirectional token/id map; immutable once built."""

    token_to_id: dict[str, int]
    id_to_token: list[str]
    lowercase: bool = True
    split_punct: bool = True

    def __len__(self) -> int:
        return len(self.id_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    def id_of(self, token: str) -> int:
        return self.token_to_id.get(token, UNK_ID)

    def token_of(self, idx: int) -> str:
        return self.id_to_token[idx]

    def save(self, path) -> None:
        """Write ``<token>\\t<id>`` lines, reserved tokens first, UTF-8 with LF."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for idx, token in enumerate(self.id_to_token):
                fh.write(f"{token}\t{idx}\n")

    @classmethod
    def load(cls, path) -> "Vocab":
        from pathlib import Path

        if not Path(path).exists():
            raise DataError(f"vocab file not found: {path}")
        token_to_id: dict[str, int] = {}
        id_to_token: list[str] = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh):
                line = line.rstrip("\n")
                if not line:
                    continue
                try:
                    token, idx = line.split("\t")
                    idx = int(idx)
                except ValueError as exc:
                    raise DataError(f"{path}:{lineno + 1}: bad vocab line {line!r}") from exc
                if idx != len(id_to_token):
                    raise DataError(f"{path}:{lineno + 1}: non-contiguous id {idx}")
                token_to_id[token] = idx
                id_to_token.append(token)
        for want, token in enumerate(RESERVED_TOKENS):
            if want >= len(id_to_token) or id_to_token[want] != token:
                raise DataError(f"{path}: reserved token {token} missing from id {want}")
        return cls(token_to_id=token_to_id, id_to_token=id_to_token)


def build_vocab(corpus, min_count: int = 1, lowercase: bool = True,
                split_punct: bool = True) -> Vocab:
    """Build a vocabulary from an iterable of texts.

    Tokens occurring fewer than ``min_count`` times are dropped (they encode
    as [UNK]). Reserved tokens are always present at their fixed ids and do
    not consume corpus counts.
    """
    counts: Counter[str] = Counter()
    seen_any = False
    for text in corpus:
        seen_any = True
        for token in tokenize(text, lowercase, split_punct):
            if token not in _RESERVED_SET:
                counts[token] += 1
    if not seen_any:
        raise DataError("cannot build a vocabulary from an empty corpus")
    id_to_token = list(RESERVED_TOKENS)
    for token, count in sorted(counts.items()):
        if count >= min_count:
            id_to_token.append(token)
    token_to_id = {token: idx for idx, token in enumerate(id_to_token)}
    return Vocab(token_to_id=token_to_id, id_to_token=id_to_token,
                 lowercase=lowercase, split_punct=split_punct)


@dataclass
class TokenSequence:
    """Token ids plus the positions of any [MASK] tokens.

    ``name_span`` is set only on label-prompt sequences: the half-open token
    range covering the label name, used by pooled label representations.
    """

    ids: list[int]
    mask_positions: list[int] = field(default_factory=list)
    name_span: tuple[int, int] | None = None

    def __len__(self) -> int:
        return len(self.ids)

    def single_mask(self) -> int:
        if len(self.mask_positions) != 1:
            raise ContractError(
                f"expected exactly one [MASK], found {len(self.mask_positions)}"
            )
        return self.mask_positions[0]


def encode(text: str, vocab: Vocab, max_len: int = DEFAULT_MAX_LEN,
           suffix: str | None = None) -> TokenSequence:
    """Encode ``text`` (and an optional prompt ``suffix``) into token ids.

    The suffix is never truncated: when the combined length exceeds
    ``max_len`` the text region is cut from its right end and the full
    suffix is appended after.
    """
    body = tokenize(text, vocab.lowercase, vocab.split_punct)
    tail = tokenize(suffix, vocab.lowercase, vocab.split_punct) if suffix else []
    if len(tail) > max_len:
        raise ContractError(f"prompt suffix alone has {len(tail)} tokens > max_len {max_len}")
    budget = max_len - len(tail)
    tokens = body[:budget] + tail
    ids = [vocab.id_of(t) for t in tokens]
    mask_positions = [i for i, t in enumerate(ids) if t == MASK_ID]
    return TokenSequence(ids=ids, mask_positions=mask_positions)


def decode(seq: TokenSequence, vocab: Vocab) -> str:
    """Space-joined tokens; inverse of encode up to lowercasing and whitespace."""
    return " ".join(vocab.token_of(i) for i in seq.ids)
