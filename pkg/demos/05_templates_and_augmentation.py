"""Label-template sensitivity (P1-P4) and label-name augmentation.

Two ablations on the label side: swap the label-prompt template, and enrich
each label name with its two related words before prompting it.

Run:  python3 demos/05_templates_and_augmentation.py   (about a minute)
"""

import numpy as np

from maskmatch.data import SyntheticSpec, generate_synthetic
from maskmatch.harness import TrainRunConfig, sweep_templates, train
from maskmatch.paradigms import ParadigmKind
from maskmatch.prompts import render_label

dataset = generate_synthetic(SyntheticSpec(
    n_classes=4, vocab_size=120, examples_per_class=125,
    informativeness=0.7, noise=0.25, tokens_per_example=12, seed=300))

base = TrainRunConfig(
    paradigm=ParadigmKind.MASK_MATCH,
    layers=1, hidden_dim=32, heads=2, ffn_dim=64,
    max_positions=64, max_input_length=64,
    batch_size=8, grad_accum=2, peak_lr=3e-3, warmup_ratio=0.2, epochs=4)

print("=== template sweep ===")
report = sweep_templates(base, dataset, seeds=(0, 1, 2), dataset_name="synthetic-4c")
print(report.to_text())

print("\n=== augmentation toggle ===")
noisy = generate_synthetic(SyntheticSpec(
    n_classes=6, vocab_size=140, examples_per_class=100,
    informativeness=0.6, noise=0.3, tokens_per_example=12, seed=400))
name = noisy.manifest.labels[0]
aug = noisy.manifest.augmentation[0]
print("plain label-prompt:    ", render_label(name))
print("augmented label-prompt:", render_label(name, augmentation=aug))
for augmented in (False, True):
    values = []
    for seed in (0, 1, 2):
        config = TrainRunConfig(**{**base.as_dict(), "augmentation": augmented,
                                   "grad_accum": 4, "seed": seed})
        _, rep = train(config, noisy)
        values.append(rep.values["dev"])
    label = "augmented" if augmented else "plain    "
    print(f"{label} dev accuracy: mean {np.mean(values):.4f}  per-seed "
          f"{[round(v, 3) for v in values]}")
