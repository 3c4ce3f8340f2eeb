"""Input/label prompt rendering: template values, golden files, spans, truncation."""

from pathlib import Path

import pytest

from maskmatch.errors import SchemaError
from maskmatch.prompts import (
    LABEL_TEMPLATE_IDS,
    LabelSet,
    RawExample,
    TaskFamily,
    load_templates,
    render_input,
    render_label,
    render_label_set,
    render_plain,
)
from maskmatch.tokenizer import MASK_ID, build_vocab, encode

GOLDEN_DIR = Path(__file__).parent / "fixtures" / "golden_prompts"

GOLDEN_EXAMPLES = {
    "topic_or_sentiment": RawExample(
        x1="NASA plans to launch a new space telescope next year", gold=0),
    "entity_typing": RawExample(
        x1="Currently Ritek is the largest producer of OLEDs in the world",
        target="Ritek", gold=0),
    "relation_classification": RawExample(
        x1="He was an army of the Korean War", head="He", head_type="person",
        tail="army", tail_type="organization", gold=0),
    "nli_or_paraphrase": RawExample(
        x1="A soccer game with multiple males playing",
        x2="Some men are playing a sport", gold=0),
    "word_in_context": RawExample(
        x1="You must carry your camping gear", x2="Sound carries well over water",
        k1="carry", k2="carries", gold=0),
    "stance_detection": RawExample(
        x1="We are so becoming a failing nation. Between the rights of illegals "
           "and uneducated and now obese are claiming rights.",
        stance_target="illegal immigrant", gold=0),
}


@pytest.mark.parametrize("family", sorted(GOLDEN_EXAMPLES))
def test_golden_renderings_byte_exact(family):
    rendered = render_input(GOLDEN_EXAMPLES[family], TaskFamily(family)).text
    expected = (GOLDEN_DIR / f"{family}.txt").read_bytes()
    assert rendered.encode("utf-8") + b"\n" == expected


class TestRenderInput:
    def test_sentiment_suffix(self):
        out = render_input(GOLDEN_EXAMPLES["topic_or_sentiment"],
                           TaskFamily.TOPIC_OR_SENTIMENT)
        assert out.prompt == "It is [MASK]."
        assert out.text.endswith("next year . It is [MASK].")

    def test_entity_typing_suffix(self):
        out = render_input(GOLDEN_EXAMPLES["entity_typing"], TaskFamily.ENTITY_TYPING)
        assert out.prompt == "The type of Ritek is [MASK]."

    def test_word_in_context_suffix_no_period(self):
        out = render_input(GOLDEN_EXAMPLES["word_in_context"], TaskFamily.WORD_IN_CONTEXT)
        assert out.prompt == "carry is [MASK] to carries"

    def test_relation_markers_and_types(self):
        out = render_input(GOLDEN_EXAMPLES["relation_classification"],
                           TaskFamily.RELATION_CLASSIFICATION)
        assert "[E1] He (person) [/E1]" in out.body
        assert "[E2] army (organization) [/E2]" in out.body

    def test_pair_sep_configurable(self):
        ex = GOLDEN_EXAMPLES["nli_or_paraphrase"]
        with_sep = render_input(ex, TaskFamily.NLI_OR_PARAPHRASE)
        without = render_input(ex, TaskFamily.NLI_OR_PARAPHRASE, pair_sep=False)
        assert "[SEP]" in with_sep.body
        assert "[SEP]" not in without.body

    def test_exactly_one_mask(self):
        for family, ex in GOLDEN_EXAMPLES.items():
            assert render_input(ex, TaskFamily(family)).text.count("[MASK]") == 1

    def test_missing_field_names_field_and_family(self):
        with pytest.raises(SchemaError, match="entity_typing.*'target'"):
            render_input(RawExample(x1="some text", gold=0), TaskFamily.ENTITY_TYPING)

    def test_entity_not_found(self):
        ex = RawExample(x1="nothing here", head="He", tail="army", gold=0)
        with pytest.raises(SchemaError, match="'He'"):
            render_input(ex, TaskFamily.RELATION_CLASSIFICATION)

    def test_mask_in_raw_input_rejected(self):
        ex = RawExample(x1="sneaky [MASK] text", gold=0)
        with pytest.raises(SchemaError):
            render_input(ex, TaskFamily.TOPIC_OR_SENTIMENT)

    def test_truncation_keeps_prompt_verbatim(self):
        vocab = build_vocab(["it is [MASK] filler ."], min_count=1)
        for factor in (2, 10):
            ex = RawExample(x1=" ".join(["filler"] * (50 * factor)), gold=0)
            rendered = render_input(ex, TaskFamily.TOPIC_OR_SENTIMENT)
            seq = rendered.to_sequence(vocab, max_len=50)
            assert len(seq) == 50
            tail = [vocab.token_of(i) for i in seq.ids[-5:]]
            assert tail == [".", "it", "is", "[MASK]", "."]


class TestRenderLabel:
    def test_p1(self):
        assert render_label("positive", "P1") == "positive is [MASK]."

    def test_p2(self):
        assert render_label("organization", "P2") == "The meaning of organization is [MASK]."

    def test_p3(self):
        assert render_label("person", "P3") == "person means [MASK]."

    def test_p4(self):
        assert render_label("person", "P4") == "person is similar to [MASK]."

    def test_augmentation_join(self):
        out = render_label("person", "P1", augmentation=("human", "individual"))
        assert out == "person, human, individual is [MASK]."

    def test_empty_name_rejected(self):
        with pytest.raises(SchemaError):
            render_label("", "P1")

    def test_unknown_template_rejected(self):
        with pytest.raises(SchemaError):
            render_label("positive", "P9")

    def test_injective_on_names(self):
        names = ["positive", "negative", "neutral", "very positive"]
        for tid in LABEL_TEMPLATE_IDS:
            rendered = [render_label(n, tid) for n in names]
            assert len(set(rendered)) == len(names)


class TestRenderLabelSet:
    @pytest.fixture
    def vocab(self):
        corpus = ["positive negative illegal immigrant natural language inference",
                  "is [MASK] . the meaning of means similar to , human individual"]
        return build_vocab(corpus, min_count=1)

    def test_one_sequence_per_label_with_one_mask(self, vocab):
        labels = LabelSet(names=["positive", "negative", "neutral"])
        seqs = render_label_set(labels, vocab)
        assert len(seqs) == 3
        for seq in seqs:
            assert len(seq.mask_positions) == 1
            assert seq.ids[seq.mask_positions[0]] == MASK_ID

    def test_order_preserved(self, vocab):
        labels = LabelSet(names=["negative", "positive"])
        seqs = render_label_set(labels, vocab)
        assert vocab.token_of(seqs[0].ids[0]) == "negative"
        assert vocab.token_of(seqs[1].ids[0]) == "positive"

    def test_multiword_name_span(self, vocab):
        labels = LabelSet(names=["illegal immigrant"])
        (seq,) = render_label_set(labels, vocab)
        assert seq.name_span == (0, 2)
        span_tokens = [vocab.token_of(i) for i in seq.ids[0:2]]
        assert span_tokens == ["illegal", "immigrant"]

    def test_p2_span_offset_by_prefix(self, vocab):
        labels = LabelSet(names=["natural language inference"], template_id="P2")
        (seq,) = render_label_set(labels, vocab)
        assert seq.name_span == (3, 6)
        span_tokens = [vocab.token_of(i) for i in seq.ids[3:6]]
        assert span_tokens == ["natural", "language", "inference"]

    def test_augmented_span_covers_added_words(self, vocab):
        labels = LabelSet(names=["positive"], augmentation=[("human", "individual")])
        (seq,) = render_label_set(labels, vocab)
        start, stop = seq.name_span
        tokens = [vocab.token_of(i) for i in seq.ids[start:stop]]
        assert tokens == ["positive", ",", "human", ",", "individual"]

    def test_duplicate_names_rejected(self):
        with pytest.raises(SchemaError):
            LabelSet(names=["a", "a"])


class TestRenderPlain:
    def test_cls_prefix_single_input(self):
        out = render_plain(GOLDEN_EXAMPLES["topic_or_sentiment"],
                           TaskFamily.TOPIC_OR_SENTIMENT)
        assert out.startswith("[CLS] NASA plans")
        assert "[MASK]" not in out

    def test_paired_input_keeps_both_texts(self):
        out = render_plain(GOLDEN_EXAMPLES["nli_or_paraphrase"],
                           TaskFamily.NLI_OR_PARAPHRASE)
        assert out == "[CLS] A soccer game with multiple males playing [SEP] " \
                      "Some men are playing a sport"

    def test_entity_typing_appends_target(self):
        out = render_plain(GOLDEN_EXAMPLES["entity_typing"], TaskFamily.ENTITY_TYPING)
        assert out.endswith("[SEP] Ritek")


def test_templates_resource_complete():
    templates = load_templates()
    assert set(templates["label"]) == set(LABEL_TEMPLATE_IDS)
    assert set(templates["input"]) == {f.value for f in TaskFamily}
    for fmt in templates["label"].values():
        assert fmt.count("[MASK]") == 1
    for fmt in templates["input"].values():
        assert fmt.count("[MASK]") == 1
