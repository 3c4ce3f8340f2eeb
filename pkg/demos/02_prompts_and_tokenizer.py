"""Rendering input-prompts for every task family and label-prompts P1-P4.

Run:  python3 demos/02_prompts_and_tokenizer.py
"""

from maskmatch.prompts import (
    LabelSet,
    RawExample,
    TaskFamily,
    render_input,
    render_label,
    render_label_set,
    render_plain,
)
from maskmatch.tokenizer import build_vocab, decode, encode

examples = {
    TaskFamily.TOPIC_OR_SENTIMENT: RawExample(
        x1="The crew fixed the antenna before the storm arrived", gold=0),
    TaskFamily.ENTITY_TYPING: RawExample(
        x1="Currently Ritek is the largest producer of OLEDs in the world",
        target="Ritek", gold=1),
    TaskFamily.RELATION_CLASSIFICATION: RawExample(
        x1="He was an army of the Korean War", head="He", head_type="person",
        tail="army", tail_type="organization", gold=0),
    TaskFamily.NLI_OR_PARAPHRASE: RawExample(
        x1="A soccer game with multiple males playing",
        x2="Some men are playing a sport", gold=0),
    TaskFamily.WORD_IN_CONTEXT: RawExample(
        x1="You must carry your camping gear", x2="Sound carries well over water",
        k1="carry", k2="carries", gold=1),
    TaskFamily.STANCE_DETECTION: RawExample(
        x1="Closing the square to traffic gave us back a livable neighborhood",
        stance_target="car free city centers", gold=0),
}

print("=== input-prompts (one [MASK] each) ===")
for family, ex in examples.items():
    print(f"\n[{family.value}]")
    print(" prompted:", render_input(ex, family).text)
    print(" plain:   ", render_plain(ex, family))

print("\n=== label-prompts ===")
for template in ("P1", "P2", "P3", "P4"):
    print(f" {template}:", render_label("organization", template))
print(" with augmentation:",
      render_label("person", "P1", augmentation=("human", "individual")))

print("\n=== encoding and truncation ===")
vocab = build_vocab([render_input(ex, fam).text for fam, ex in examples.items()],
                    min_count=1)
rendered = render_input(examples[TaskFamily.TOPIC_OR_SENTIMENT],
                        TaskFamily.TOPIC_OR_SENTIMENT)
seq = rendered.to_sequence(vocab, max_len=500)
print(" tokens:", decode(seq, vocab))
print(" mask position:", seq.mask_positions)

# The prompt survives even a brutal truncation of the raw input.
long_input = RawExample(x1="storm " * 900, gold=0)
long_rendered = render_input(long_input, TaskFamily.TOPIC_OR_SENTIMENT)
short = long_rendered.to_sequence(vocab, max_len=12)
print(" truncated to 12 tokens:", decode(short, vocab))

print("\n=== label sequences carry their name spans ===")
labels = LabelSet(names=["military conflict", "trade agreement"])
label_vocab = build_vocab(["military conflict trade agreement is [MASK] ."],
                          min_count=1)
for name, seq in zip(labels.names, render_label_set(labels, label_vocab)):
    print(f" {name!r}: span {seq.name_span}, tokens {decode(seq, label_vocab)!r}")
