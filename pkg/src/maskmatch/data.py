"""Dataset ingestion, train/dev/test handling, low-resource subsampling, and
synthetic task generation.

File formats (all UTF-8, LF):

  split files   one record per line, tab-separated, first line is the header
                naming the fields (a subset of RawExample fields plus gold).
  manifest      key=value lines: family, metric, labels (|-separated names in
                canonical class order), optional aug (|-separated pairs of
                space-joined words), and train/dev/test paths relative to the
                manifest file.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, fields as dataclass_fields, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, SchemaError
from .prompts import RawExample, TaskFamily, validate_example

log = logging.getLogger(__name__)

METRIC_IDS = ("accuracy", "micro_f1", "macro_f1")
SPLIT_NAMES = ("train", "dev", "test")

_EXAMPLE_FIELDS = {f.name for f in dataclass_fields(RawExample)}


@dataclass
class DatasetManifest:
    family: TaskFamily
    metric: str
    labels: list[str]
    train_path: Path | None = None
    dev_path: Path | None = None
    test_path: Path | None = None
    augmentation: list[tuple[str, str]] | None = None

    def __post_init__(self):
        if self.metric not in METRIC_IDS:
            raise DataError(f"unknown metric {self.metric!r}; expected one of {METRIC_IDS}")
        if len(set(self.labels)) != len(self.labels) or not self.labels:
            raise DataError("labels must be non-empty and unique")

    @property
    def n_classes(self) -> int:
        return len(self.labels)


@dataclass
class LoadedDataset:
    manifest: DatasetManifest
    splits: dict[str, list[RawExample]]

    def split(self, name: str) -> list[RawExample]:
        return self.splits[name]


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    if not path.exists():
        raise DataError(f"manifest not found: {path}")
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            key, eq, value = line.partition("=")
            if not eq:
                raise DataError(f"{path}:{lineno + 1}: expected key=value, got {line!r}")
            values[key] = value
    for key in ("family", "metric", "labels", "train", "dev", "test"):
        if key not in values:
            raise DataError(f"{path}: manifest missing required key {key!r}")
    try:
        family = TaskFamily(values["family"])
    except ValueError as exc:
        raise DataError(f"{path}: unknown task family {values['family']!r}") from exc
    augmentation = None
    if values.get("aug"):
        augmentation = []
        for entry in values["aug"].split("|"):
            words = entry.split(" ")
            if len(words) != 2:
                raise DataError(f"{path}: aug entries need exactly two words, got {entry!r}")
            augmentation.append((words[0], words[1]))
    base = path.parent
    return DatasetManifest(
        family=family,
        metric=values["metric"],
        labels=values["labels"].split("|"),
        train_path=base / values["train"],
        dev_path=base / values["dev"],
        test_path=base / values["test"],
        augmentation=augmentation,
    )


def save_manifest(manifest: DatasetManifest, path) -> None:
    path = Path(path)
    lines = [
        f"family={manifest.family.value}",
        f"metric={manifest.metric}",
        "labels=" + "|".join(manifest.labels),
    ]
    if manifest.augmentation is not None:
        lines.append("aug=" + "|".join(f"{a} {b}" for a, b in manifest.augmentation))
    for key, split_path in (("train", manifest.train_path),
                            ("dev", manifest.dev_path),
                            ("test", manifest.test_path)):
        lines.append(f"{key}={Path(split_path).name}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _read_split(path: Path, family: TaskFamily, n_classes: int) -> list[RawExample]:
    if not path.exists():
        raise DataError(f"split file not found: {path}")
    examples = []
    with open(path, encoding="utf-8") as fh:
        header_line = fh.readline().rstrip("\n")
        columns = header_line.split("\t")
        unknown = [c for c in columns if c not in _EXAMPLE_FIELDS]
        if unknown:
            raise DataError(f"{path}:1: unknown column(s) {unknown}")
        if "gold" not in columns or "x1" not in columns:
            raise DataError(f"{path}:1: header must include x1 and gold")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != len(columns):
                raise DataError(
                    f"{path}:{lineno}: expected {len(columns)} fields, got {len(parts)}"
                )
            record = dict(zip(columns, parts))
            try:
                gold = int(record["gold"])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: field 'gold' is not an integer") from exc
            if not 0 <= gold < n_classes:
                raise DataError(
                    f"{path}:{lineno}: gold index {gold} out of range for "
                    f"{n_classes} labels"
                )
            record["gold"] = gold
            example = RawExample(**record)
            try:
                validate_example(example, family)
            except SchemaError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc
            examples.append(example)
    return examples


def save_split(examples: list[RawExample], family: TaskFamily, path) -> None:
    """Write one split file using exactly the columns the family requires."""
    columns = _columns_for(family)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(columns) + "\n")
        for ex in examples:
            row = []
            for col in columns:
                value = getattr(ex, col)
                value = "" if value is None else str(value)
                if "\t" in value or "\n" in value:
                    raise DataError(f"field {col!r} contains a tab or newline")
                row.append(value)
            fh.write("\t".join(row) + "\n")


def _columns_for(family: TaskFamily) -> list[str]:
    base = {
        TaskFamily.TOPIC_OR_SENTIMENT: ["x1"],
        TaskFamily.ENTITY_TYPING: ["x1", "target"],
        TaskFamily.RELATION_CLASSIFICATION: ["x1", "head", "head_type", "tail", "tail_type"],
        TaskFamily.NLI_OR_PARAPHRASE: ["x1", "x2"],
        TaskFamily.WORD_IN_CONTEXT: ["x1", "x2", "k1", "k2"],
        TaskFamily.STANCE_DETECTION: ["x1", "stance_target"],
    }[family]
    return base + ["gold"]


def load_dataset(manifest: DatasetManifest) -> LoadedDataset:
    """Read and validate all three splits named by the manifest."""
    splits = {
        "train": _read_split(Path(manifest.train_path), manifest.family, manifest.n_classes),
        "dev": _read_split(Path(manifest.dev_path), manifest.family, manifest.n_classes),
        "test": _read_split(Path(manifest.test_path), manifest.family, manifest.n_classes),
    }
    return LoadedDataset(manifest=manifest, splits=splits)


def subsample_low_resource(train: list[RawExample], fraction: float,
                           seed: int) -> list[RawExample]:
    """Uniform sample without replacement of round(fraction * N) examples.

    Deterministic per seed; original order is preserved. When the sample is
    large enough to cover every class, missing classes are patched in by
    swapping out examples of over-represented classes (logged).
    """
    if not 0.0 < fraction <= 1.0:
        raise ConfigError(f"low-resource fraction must be in (0, 1], got {fraction}")
    n_total = len(train)
    k = int(round(fraction * n_total))
    rng = np.random.default_rng(seed)
    chosen = set(rng.permutation(n_total)[:k].tolist())

    classes = sorted({ex.gold for ex in train})
    if k >= len(classes):
        missing = [c for c in classes if not any(train[i].gold == c for i in chosen)]
        if missing:
            log.info("low-resource sample missing %d class(es); patching coverage", len(missing))
        for c in missing:
            counts: dict[int, int] = {}
            for i in chosen:
                counts[train[i].gold] = counts.get(train[i].gold, 0) + 1
            # Swap in the first unchosen example of the missing class for the
            # last chosen example of the most frequent class.
            incoming = next(i for i in range(n_total)
                            if train[i].gold == c and i not in chosen)
            richest = max(counts, key=lambda g: (counts[g], g))
            outgoing = max(i for i in chosen if train[i].gold == richest)
            chosen.remove(outgoing)
            chosen.add(incoming)
    return [train[i] for i in sorted(chosen)]


# ---------------------------------------------------------------------------
# synthetic tasks
# ---------------------------------------------------------------------------

POOL_WORDS_PER_CLASS = 4  # two form the label name, two are its related words
_MIN_NOISE_WORDS = 8


@dataclass
class SyntheticSpec:
    """Recipe for a synthetic topic-style classification task.

    Each class owns a disjoint pool of made-up words; its label name is the
    first two, its related (augmentation) words the other two. Every input
    token comes from the gold class pool with probability ``informativeness``
    and from a shared noise vocabulary otherwise; afterwards each token is
    corrupted to a uniformly random word with probability ``noise``.
    """

    n_classes: int
    vocab_size: int = 160
    examples_per_class: int = 50
    informativeness: float = 0.9
    noise: float = 0.1
    tokens_per_example: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.n_classes < 2:
            raise ConfigError("need at least two classes")
        if not 0.0 <= self.informativeness <= 1.0:
            raise ConfigError(f"informativeness must be in [0, 1], got {self.informativeness}")
        if not 0.0 <= self.noise <= 1.0:
            raise ConfigError(f"noise must be in [0, 1], got {self.noise}")
        if self.examples_per_class < 3:
            raise ConfigError("need at least three examples per class for 80/10/10 splits")
        needed = self.n_classes * POOL_WORDS_PER_CLASS + _MIN_NOISE_WORDS
        if self.vocab_size < needed:
            raise ConfigError(
                f"vocab_size {self.vocab_size} too small for {self.n_classes} classes; "
                f"need at least {needed}"
            )


_LETTERS = np.array(list("abcdefghijklmnopqrstuvwxyz"))


def _make_words(rng: np.random.Generator, count: int) -> list[str]:
    words: list[str] = []
    seen = set()
    while len(words) < count:
        length = int(rng.integers(5, 9))
        word = "".join(rng.choice(_LETTERS, size=length))
        if word not in seen:
            seen.add(word)
            words.append(word)
    return words


def generate_synthetic(spec: SyntheticSpec) -> LoadedDataset:
    """Deterministically generate a dataset from ``spec`` (pure in the spec+seed)."""
    rng = np.random.default_rng(spec.seed)
    words = _make_words(rng, spec.vocab_size)
    pools = [words[c * POOL_WORDS_PER_CLASS:(c + 1) * POOL_WORDS_PER_CLASS]
             for c in range(spec.n_classes)]
    noise_words = words[spec.n_classes * POOL_WORDS_PER_CLASS:]
    labels = [f"{pool[0]} {pool[1]}" for pool in pools]
    augmentation = [(pool[2], pool[3]) for pool in pools]

    seen_texts: set[str] = set()

    def one_example(c: int) -> RawExample:
        for _ in range(100):
            tokens = []
            for _ in range(spec.tokens_per_example):
                if rng.random() < spec.informativeness:
                    word = pools[c][int(rng.integers(POOL_WORDS_PER_CLASS))]
                else:
                    word = noise_words[int(rng.integers(len(noise_words)))]
                if rng.random() < spec.noise:
                    word = words[int(rng.integers(len(words)))]
                tokens.append(word)
            text = " ".join(tokens)
            if text not in seen_texts:
                seen_texts.add(text)
                return RawExample(x1=text, gold=c)
        raise ConfigError("could not generate distinct example texts; enlarge the spec")

    per_split: dict[str, list[RawExample]] = {name: [] for name in SPLIT_NAMES}
    dev_c = max(1, spec.examples_per_class // 10)
    test_c = max(1, spec.examples_per_class // 10)
    train_c = spec.examples_per_class - dev_c - test_c
    for c in range(spec.n_classes):
        examples = [one_example(c) for _ in range(spec.examples_per_class)]
        per_split["train"].extend(examples[:train_c])
        per_split["dev"].extend(examples[train_c:train_c + dev_c])
        per_split["test"].extend(examples[train_c + dev_c:])
    for name in SPLIT_NAMES:
        order = rng.permutation(len(per_split[name]))
        per_split[name] = [per_split[name][i] for i in order]

    manifest = DatasetManifest(family=TaskFamily.TOPIC_OR_SENTIMENT, metric="accuracy",
                               labels=labels, augmentation=augmentation)
    return LoadedDataset(manifest=manifest, splits=per_split)


def write_dataset(dataset: LoadedDataset, out_dir) -> Path:
    """Persist a dataset as split files plus a manifest; returns the manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = replace(
        dataset.manifest,
        train_path=out_dir / "train.tsv",
        dev_path=out_dir / "dev.tsv",
        test_path=out_dir / "test.tsv",
    )
    for name in SPLIT_NAMES:
        save_split(dataset.splits[name], manifest.family, getattr(manifest, f"{name}_path"))
    manifest_path = out_dir / "manifest.txt"
    save_manifest(manifest, manifest_path)
    return manifest_path


def parse_synthetic_spec(path) -> SyntheticSpec:
    """Read a key=value synthetic-task spec file."""
    if not Path(path).exists():
        raise ConfigError(f"synthetic spec not found: {path}")
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            key, eq, value = line.partition("=")
            if not eq:
                raise ConfigError(f"{path}:{lineno + 1}: expected key=value, got {line!r}")
            values[key] = value
    known = {f.name: f.type for f in dataclass_fields(SyntheticSpec)}
    kwargs = {}
    for key, raw in values.items():
        if key not in known:
            raise ConfigError(f"{path}: unknown synthetic spec key {key!r}")
        kwargs[key] = float(raw) if key in ("informativeness", "noise") else int(raw)
    if "n_classes" not in kwargs:
        raise ConfigError(f"{path}: synthetic spec must set n_classes")
    return SyntheticSpec(**kwargs)
