"""Prompt rendering for inputs and labels.

Every task family gets one input-prompt template; labels get one of four
templates P1-P4, all carrying a single [MASK] whose hidden state stands in
for the input or the label. Templates live in ``templates.txt`` so sweeps
stay data driven. A period token separates the raw input region from the
prompt suffix; the suffix itself is never truncated.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from importlib import resources

from .errors import SchemaError
from .tokenizer import (
    CLS,
    E1_CLOSE,
    E1_OPEN,
    E2_CLOSE,
    E2_OPEN,
    MASK,
    MASK_ID,
    SEP,
    TokenSequence,
    Vocab,
    encode,
    tokenize,
)

LABEL_TEMPLATE_IDS = ("P1", "P2", "P3", "P4")
DEFAULT_LABEL_TEMPLATE = "P1"

# Token placed between the raw input region and the prompt suffix.
PROMPT_SEPARATOR = "."


class TaskFamily(str, Enum):
    TOPIC_OR_SENTIMENT = "topic_or_sentiment"
    ENTITY_TYPING = "entity_typing"
    RELATION_CLASSIFICATION = "relation_classification"
    NLI_OR_PARAPHRASE = "nli_or_paraphrase"
    WORD_IN_CONTEXT = "word_in_context"
    STANCE_DETECTION = "stance_detection"

    @property
    def paired_input(self) -> bool:
        return self in (TaskFamily.NLI_OR_PARAPHRASE, TaskFamily.WORD_IN_CONTEXT)


_REQUIRED_FIELDS = {
    TaskFamily.TOPIC_OR_SENTIMENT: ("x1",),
    TaskFamily.ENTITY_TYPING: ("x1", "target"),
    TaskFamily.RELATION_CLASSIFICATION: ("x1", "head", "tail"),
    TaskFamily.NLI_OR_PARAPHRASE: ("x1", "x2"),
    TaskFamily.WORD_IN_CONTEXT: ("x1", "x2", "k1", "k2"),
    TaskFamily.STANCE_DETECTION: ("x1", "stance_target"),
}


@dataclass
class RawExample:
    """One unrendered example; only the fields its family needs are set."""

    x1: str
    gold: int
    x2: str | None = None
    target: str | None = None
    head: str | None = None
    head_type: str | None = None
    tail: str | None = None
    tail_type: str | None = None
    k1: str | None = None
    k2: str | None = None
    stance_target: str | None = None


def validate_example(ex: RawExample, family: TaskFamily) -> None:
    for name in _REQUIRED_FIELDS[family]:
        if not getattr(ex, name):
            raise SchemaError(f"{family.value} example missing required field '{name}'")


@lru_cache(maxsize=1)
def load_templates() -> dict:
    """Read templates.txt into {'label': {id: fmt}, 'input': {family: fmt}}."""
    out: dict[str, dict[str, str]] = {"label": {}, "input": {}}
    text = resources.files("maskmatch").joinpath("templates.txt").read_text("utf-8")
    for line in text.splitlines():
        if not line or line.startswith("#"):
            continue
        kind, key, fmt = line.split("\t", 2)
        out[kind][key] = fmt
    return out


@dataclass
class PromptedExample:
    """A rendered input: raw-input region plus prompt suffix with one [MASK]."""

    body: str
    prompt: str
    family: TaskFamily
    gold: int

    @property
    def text(self) -> str:
        return f"{self.body} {PROMPT_SEPARATOR} {self.prompt}"

    def to_sequence(self, vocab: Vocab, max_len: int) -> TokenSequence:
        seq = encode(self.body, vocab, max_len,
                     suffix=f"{PROMPT_SEPARATOR} {self.prompt}")
        seq.single_mask()
        return seq


def _mark_entity(text: str, span: str, open_tok: str, close_tok: str,
                 type_hint: str | None, family: TaskFamily) -> str:
    inner = f"{span} ({type_hint})" if type_hint else span
    pattern = re.compile(rf"(?<!\w){re.escape(span)}(?!\w)")
    marked, n = pattern.subn(f"{open_tok} {inner} {close_tok}", text, count=1)
    if n == 0:
        raise SchemaError(f"{family.value} example: entity '{span}' not found in x1")
    return marked


def render_input(ex: RawExample, family: TaskFamily, pair_sep: bool = True) -> PromptedExample:
    """Render the input-prompt for ``ex``.

    Paired-input families concatenate the two texts (with [SEP] unless
    ``pair_sep`` is off). Relation classification wraps head and tail with
    entity markers and inline type hints before the prompt is appended.
    """
    validate_example(ex, family)
    fmt = load_templates()["input"][family.value]
    if family is TaskFamily.RELATION_CLASSIFICATION:
        body = _mark_entity(ex.x1, ex.head, E1_OPEN, E1_CLOSE, ex.head_type, family)
        body = _mark_entity(body, ex.tail, E2_OPEN, E2_CLOSE, ex.tail_type, family)
    elif family.paired_input:
        joiner = f" {SEP} " if pair_sep else " "
        body = f"{ex.x1}{joiner}{ex.x2}"
    else:
        body = ex.x1
    prompt = fmt.format(target=ex.target, head=ex.head, tail=ex.tail,
                        k1=ex.k1, k2=ex.k2, stance_target=ex.stance_target)
    if MASK in tokenize(body, lowercase=False):
        raise SchemaError(f"{family.value} example: raw input already contains {MASK}")
    if prompt.count(MASK) != 1:
        raise SchemaError(f"{family.value} template must contain exactly one {MASK}")
    return PromptedExample(body=body, prompt=prompt, family=family, gold=ex.gold)


def render_plain(ex: RawExample, family: TaskFamily) -> str:
    """[CLS]-prefixed rendering without any prompt, for the classifier-head paradigm.

    Task-specific strings the prompt would have carried (entity target,
    stance target, keywords) are appended after [SEP] so the classifier
    sees the same information.
    """
    validate_example(ex, family)
    if family is TaskFamily.RELATION_CLASSIFICATION:
        body = _mark_entity(ex.x1, ex.head, E1_OPEN, E1_CLOSE, ex.head_type, family)
        body = _mark_entity(body, ex.tail, E2_OPEN, E2_CLOSE, ex.tail_type, family)
        return f"{CLS} {body}"
    if family is TaskFamily.ENTITY_TYPING:
        return f"{CLS} {ex.x1} {SEP} {ex.target}"
    if family is TaskFamily.STANCE_DETECTION:
        return f"{CLS} {ex.x1} {SEP} {ex.stance_target}"
    if family is TaskFamily.WORD_IN_CONTEXT:
        return f"{CLS} {ex.x1} {SEP} {ex.x2} {SEP} {ex.k1} {SEP} {ex.k2}"
    if family is TaskFamily.NLI_OR_PARAPHRASE:
        return f"{CLS} {ex.x1} {SEP} {ex.x2}"
    return f"{CLS} {ex.x1}"


@dataclass
class LabelSet:
    """Ordered label names; order fixes the class-index mapping."""

    names: list[str]
    template_id: str = DEFAULT_LABEL_TEMPLATE
    augmentation: list[tuple[str, str]] | None = None

    def __post_init__(self):
        if not self.names or any(not n for n in self.names):
            raise SchemaError("label names must be non-empty")
        if len(set(self.names)) != len(self.names):
            raise SchemaError("label names must be unique")
        if self.template_id not in LABEL_TEMPLATE_IDS:
            raise SchemaError(f"unknown label template {self.template_id!r}")
        if self.augmentation is not None and len(self.augmentation) != len(self.names):
            raise SchemaError("augmentation list must match label count")

    def display_name(self, index: int) -> str:
        """Label name with augmentation words joined in, if configured."""
        name = self.names[index]
        if self.augmentation is None:
            return name
        w1, w2 = self.augmentation[index]
        return f"{name}, {w1}, {w2}"

    def __len__(self) -> int:
        return len(self.names)


def render_label(name: str, template_id: str = DEFAULT_LABEL_TEMPLATE,
                 augmentation: tuple[str, str] | None = None) -> str:
    """Render one label-prompt; augmentation words are appended to the name."""
    if not name:
        raise SchemaError("label name must be non-empty")
    if template_id not in LABEL_TEMPLATE_IDS:
        raise SchemaError(f"unknown label template {template_id!r}")
    if augmentation is not None:
        name = f"{name}, {augmentation[0]}, {augmentation[1]}"
    return load_templates()["label"][template_id].format(name=name)


def render_label_set(labels: LabelSet, vocab: Vocab, max_len: int = 64) -> list[TokenSequence]:
    """Encode every label-prompt, in canonical order, with its name span.

    The name span covers the (possibly augmented) label-name tokens; the
    pooled-name label representation reads exactly those rows.
    """
    fmt = load_templates()["label"][labels.template_id]
    prefix, _, _ = fmt.partition("{name}")
    prefix_len = len(tokenize(prefix, vocab.lowercase, vocab.split_punct))
    sequences = []
    for index in range(len(labels)):
        display = labels.display_name(index)
        rendered = render_label(labels.names[index], labels.template_id,
                                None if labels.augmentation is None
                                else labels.augmentation[index])
        seq = encode(rendered, vocab, max_len)
        seq.single_mask()
        name_len = len(tokenize(display, vocab.lowercase, vocab.split_punct))
        seq.name_span = (prefix_len, prefix_len + name_len)
        sequences.append(seq)
    return sequences
