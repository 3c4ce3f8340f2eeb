"""Training loop, evaluation, and experiment orchestration.

One run = one paradigm, one dataset, one seed. Training uses gradient
accumulation (the loss of each accumulation window is the mean over its
microbatches, so the update equals large-batch training in exact
arithmetic), a linear warmup/decay schedule consulted exactly once per
optimizer step, and best-dev model selection. Everything is deterministic
in (config, seed, dataset).
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import time
from dataclasses import dataclass, field, fields as dataclass_fields, replace

import numpy as np

from .data import DatasetManifest, LoadedDataset, subsample_low_resource
from .encoder import (
    EncoderConfig,
    forward_batch,
    init_encoder_params,
    load_checkpoint,
    pad_batch,
    save_checkpoint,
)
from .errors import ConfigError, NumericError
from .metrics import accuracy, compute_metric, micro_f1
from .numerics import (
    GradTape,
    LrSchedule,
    OptimizerState,
    Tensor,
    adamw_step,
    clip_grad_norm,
    default_dtype,
    grads_of,
    lr_at,
    set_default_dtype,
    zero_grads,
)
from .paradigms import (
    PARADIGM_CODES,
    LabelBank,
    ParadigmKind,
    init_head_params,
    input_reprs_batch,
    label_bank,
    loss as paradigm_loss,
)
from .prompts import (
    DEFAULT_LABEL_TEMPLATE,
    LABEL_TEMPLATE_IDS,
    LabelSet,
    render_input,
    render_label_set,
    render_plain,
)
from .tokenizer import TokenSequence, Vocab, build_vocab, encode

log = logging.getLogger(__name__)

RESULT_CSV_COLUMNS = ("run_id", "paradigm", "dataset", "template", "seed",
                      "metric", "value", "wall_seconds")


@dataclass
class TrainRunConfig:
    """Everything that determines a training run besides the dataset bytes."""

    paradigm: ParadigmKind = ParadigmKind.MASK_MATCH
    layers: int = 2
    hidden_dim: int = 128
    heads: int = 4
    ffn_dim: int = 256
    max_positions: int = 512
    batch_size: int = 8
    grad_accum: int = 4
    peak_lr: float = 1e-5
    warmup_ratio: float = 0.2
    epochs: int = 20
    max_input_length: int = 500
    seed: int = 0
    label_template: str = DEFAULT_LABEL_TEMPLATE
    augmentation: bool = False
    low_resource: float | None = None
    weight_decay: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    clip_norm: float = 1.0
    dropout: float = 0.0
    temperature: float = 1.0
    pool_mode: str = "max"
    pool_full_prompt: bool = False
    pair_sep: bool = True
    min_count: int = 1
    dtype: str = "float64"
    selection: str = "best"

    def __post_init__(self):
        if isinstance(self.paradigm, str):
            self.paradigm = PARADIGM_CODES.get(self.paradigm, None) or ParadigmKind(self.paradigm)
        for name in ("layers", "hidden_dim", "heads", "ffn_dim", "batch_size",
                     "grad_accum", "epochs", "max_input_length"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.label_template not in LABEL_TEMPLATE_IDS:
            raise ConfigError(f"unknown label template {self.label_template!r}")
        if self.dtype not in ("float32", "float64"):
            raise ConfigError(f"dtype must be float32 or float64, got {self.dtype!r}")
        if self.selection not in ("best", "final"):
            raise ConfigError(f"selection must be best or final, got {self.selection!r}")
        if self.max_positions < self.max_input_length:
            raise ConfigError("max_positions must cover max_input_length")
        if self.low_resource is not None and not 0.0 < self.low_resource <= 1.0:
            raise ConfigError(f"low_resource must be in (0, 1], got {self.low_resource}")

    @property
    def effective_batch(self) -> int:
        return self.batch_size * self.grad_accum

    def encoder_config(self, vocab_size: int) -> EncoderConfig:
        return EncoderConfig(vocab_size=vocab_size, layers=self.layers,
                             hidden_dim=self.hidden_dim, heads=self.heads,
                             ffn_dim=self.ffn_dim, max_positions=self.max_positions)

    def as_dict(self) -> dict:
        out = {}
        for f in dataclass_fields(self):
            value = getattr(self, f.name)
            out[f.name] = value.value if isinstance(value, ParadigmKind) else value
        return out

    def digest(self) -> str:
        canon = "\n".join(f"{k}={v}" for k, v in sorted(self.as_dict().items()))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def parse_config_file(path) -> TrainRunConfig:
    """Read a key=value run-config file mirroring TrainRunConfig fields."""
    from pathlib import Path

    if not Path(path).exists():
        raise ConfigError(f"config file not found: {path}")
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            key, eq, value = line.partition("=")
            if not eq:
                raise ConfigError(f"{path}:{lineno + 1}: expected key=value, got {line!r}")
            values[key.strip()] = value.strip()
    return config_from_mapping(values, source=str(path))


def config_from_mapping(values: dict, source: str = "<config>") -> TrainRunConfig:
    fields_by_name = {f.name: f for f in dataclass_fields(TrainRunConfig)}
    kwargs = {}
    for key, raw in values.items():
        if key not in fields_by_name:
            raise ConfigError(f"{source}: unknown config key {key!r}")
        if isinstance(raw, str):
            kwargs[key] = _parse_config_value(key, raw, source)
        else:
            kwargs[key] = raw
    return TrainRunConfig(**kwargs)


_INT_KEYS = {"layers", "hidden_dim", "heads", "ffn_dim", "max_positions", "batch_size",
             "grad_accum", "epochs", "max_input_length", "seed", "min_count"}
_FLOAT_KEYS = {"peak_lr", "warmup_ratio", "weight_decay", "beta1", "beta2", "adam_eps",
               "clip_norm", "dropout", "temperature"}
_BOOL_KEYS = {"augmentation", "pool_full_prompt", "pair_sep"}


def _parse_config_value(key: str, raw: str, source: str):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _BOOL_KEYS:
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if key == "low_resource":
            return None if raw.lower() in ("", "none") else float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"{source}: bad value {raw!r} for {key}") from exc


@dataclass
class MetricsReport:
    """What one run produced, enough to reproduce and compare it."""

    metric_name: str
    values: dict[str, float]
    epoch_train_loss: list[float]
    step_losses: list[float]
    wall_seconds: float
    seed: int
    config_digest: str
    best_epoch: int = 0
    optimizer_steps: int = 0

    def to_json_dict(self) -> dict:
        return {
            "metric": self.metric_name, "values": self.values,
            "epoch_train_loss": self.epoch_train_loss,
            "wall_seconds": self.wall_seconds, "seed": self.seed,
            "config_digest": self.config_digest, "best_epoch": self.best_epoch,
            "optimizer_steps": self.optimizer_steps,
        }


@dataclass
class TrainedModel:
    """Trained parameters plus everything needed to encode and score inputs."""

    run_config: TrainRunConfig
    encoder_config: EncoderConfig
    params: dict[str, Tensor]
    vocab: Vocab
    labels: LabelSet
    label_seqs: list[TokenSequence]


class TrainingAborted(NumericError):
    """Raised when the loss turns NaN; carries the last-good model state."""

    def __init__(self, message: str, model: TrainedModel, report: MetricsReport):
        super().__init__(message)
        self.model = model
        self.report = report


def _build_label_set(manifest: DatasetManifest, config: TrainRunConfig) -> LabelSet:
    augmentation = None
    if config.augmentation:
        if manifest.augmentation is None:
            raise ConfigError("augmentation requested but the manifest has no aug words")
        augmentation = manifest.augmentation
    return LabelSet(names=list(manifest.labels), template_id=config.label_template,
                    augmentation=augmentation)


def _encode_examples(examples, manifest, config, vocab) -> tuple[list[TokenSequence], np.ndarray]:
    seqs = []
    for ex in examples:
        if config.paradigm is ParadigmKind.FINE_TUNE:
            seqs.append(encode(render_plain(ex, manifest.family), vocab,
                               config.max_input_length))
        else:
            rendered = render_input(ex, manifest.family, pair_sep=config.pair_sep)
            seqs.append(rendered.to_sequence(vocab, config.max_input_length))
    golds = np.asarray([ex.gold for ex in examples], dtype=np.intp)
    return seqs, golds


def build_run_vocab(dataset: LoadedDataset, config: TrainRunConfig) -> Vocab:
    """Vocabulary over the train split's renderings plus the label prompts.

    Both the prompted and the plain rendering contribute, so every paradigm
    of a comparison shares one token id space.
    """
    manifest = dataset.manifest
    labels = _build_label_set(manifest, config)

    def corpus():
        for ex in dataset.split("train"):
            yield render_input(ex, manifest.family, pair_sep=config.pair_sep).text
            yield render_plain(ex, manifest.family)
        from .prompts import render_label
        for i, name in enumerate(labels.names):
            yield render_label(name, labels.template_id,
                               None if labels.augmentation is None else labels.augmentation[i])

    return build_vocab(corpus(), min_count=config.min_count)


def _batch_loss(window_indices, seqs, golds, params, enc_cfg, config, label_seqs,
                dropout_rng):
    """Taped forward of one microbatch; returns the scalar loss Tensor."""
    batch_seqs = [seqs[i] for i in window_indices]
    ids, real = pad_batch(batch_seqs)
    H = forward_batch(ids, params, enc_cfg, real_mask=real,
                      dropout_rate=config.dropout, dropout_rng=dropout_rng)
    h = input_reprs_batch(config.paradigm, H, batch_seqs)
    bank = label_bank(config.paradigm, label_seqs, params, enc_cfg,
                      pool_mode=config.pool_mode,
                      pool_full_prompt=config.pool_full_prompt)
    return paradigm_loss(h, bank, golds[window_indices], config.paradigm,
                         temperature=config.temperature)


def _copy_params(params: dict[str, Tensor]) -> dict[str, Tensor]:
    return {name: Tensor(p.data.copy(), requires_grad=True) for name, p in params.items()}


def train(config: TrainRunConfig, dataset: LoadedDataset,
          vocab: Vocab | None = None) -> tuple[TrainedModel, MetricsReport]:
    """Train one model; returns the selected checkpoint and its report.

    Dev is evaluated after every epoch; with selection="best" the returned
    parameters are those of the best dev epoch (earliest on ties). A NaN
    loss aborts with TrainingAborted carrying the last-good parameters.
    """
    t0 = time.perf_counter()
    manifest = dataset.manifest
    previous_dtype = default_dtype()
    set_default_dtype(config.dtype)
    try:
        seed_seq = np.random.SeedSequence(config.seed)
        init_ss, shuffle_ss, dropout_ss = seed_seq.spawn(3)
        init_rng = np.random.default_rng(init_ss)
        shuffle_rng = np.random.default_rng(shuffle_ss)
        dropout_rng = np.random.default_rng(dropout_ss)

        train_split = dataset.split("train")
        if config.low_resource is not None:
            train_split = subsample_low_resource(train_split, config.low_resource,
                                                 seed=config.seed)
            log.info("low-resource mode: %d of %d training examples",
                     len(train_split), len(dataset.split("train")))
        if not train_split:
            raise ConfigError("training split is empty")

        if vocab is None:
            vocab = build_run_vocab(dataset, config)
        labels = _build_label_set(manifest, config)
        label_seqs = render_label_set(labels, vocab, config.max_input_length)
        enc_cfg = config.encoder_config(len(vocab))

        train_seqs, train_golds = _encode_examples(train_split, manifest, config, vocab)
        dev_seqs, dev_golds = _encode_examples(dataset.split("dev"), manifest, config, vocab)
        test_seqs, test_golds = _encode_examples(dataset.split("test"), manifest, config, vocab)

        params = init_encoder_params(enc_cfg, init_rng)
        params.update(init_head_params(config.paradigm, len(labels),
                                       config.hidden_dim, init_rng))

        n_train = len(train_seqs)
        batches_per_epoch = math.ceil(n_train / config.batch_size)
        steps_per_epoch = math.ceil(batches_per_epoch / config.grad_accum)
        schedule = LrSchedule(peak_lr=config.peak_lr, warmup_ratio=config.warmup_ratio,
                              total_steps=steps_per_epoch * config.epochs)
        opt_state = OptimizerState(lr=config.peak_lr, beta1=config.beta1,
                                   beta2=config.beta2, eps=config.adam_eps,
                                   weight_decay=config.weight_decay)

        step_losses: list[float] = []
        epoch_train_loss: list[float] = []
        best_value = -math.inf
        best_epoch = 0
        best_params = _copy_params(params)
        step_index = 0

        def current_model(p):
            return TrainedModel(run_config=config, encoder_config=enc_cfg, params=p,
                                vocab=vocab, labels=labels, label_seqs=label_seqs)

        for epoch in range(config.epochs):
            order = shuffle_rng.permutation(n_train)
            epoch_losses: list[float] = []
            for start in range(0, batches_per_epoch, config.grad_accum):
                window = [
                    order[b * config.batch_size:(b + 1) * config.batch_size]
                    for b in range(start, min(start + config.grad_accum, batches_per_epoch))
                ]
                zero_grads(params)
                window_loss = 0.0
                for micro in window:
                    with GradTape() as tape:
                        micro_loss = _batch_loss(micro, train_seqs, train_golds, params,
                                                 enc_cfg, config, label_seqs, dropout_rng)
                        scaled = micro_loss * (1.0 / len(window))
                    window_loss += scaled.item()
                    tape.backward(scaled)
                if not math.isfinite(window_loss):
                    report = _make_report(manifest, config, {"dev": best_value},
                                          epoch_train_loss, step_losses, t0,
                                          best_epoch, step_index)
                    raise TrainingAborted(
                        f"loss became non-finite at epoch {epoch} step {step_index}; "
                        f"returning last-good parameters", current_model(params), report)
                grads = grads_of(params)
                clip_grad_norm(grads, config.clip_norm)
                step_index += 1
                adamw_step(params, grads, opt_state, lr_t=lr_at(schedule, step_index))
                if __debug__:
                    for name, p in params.items():
                        assert np.isfinite(p.data).all(), \
                            f"non-finite parameter {name} after step {step_index}"
                step_losses.append(window_loss)
                epoch_losses.append(window_loss)

            epoch_train_loss.append(float(np.mean(epoch_losses)))
            dev_value, _ = _score(params, dev_seqs, dev_golds, label_seqs, enc_cfg,
                                  config, manifest.metric, manifest.n_classes)
            log.debug("epoch %d: train loss %.5f, dev %s %.4f",
                      epoch, epoch_train_loss[-1], manifest.metric, dev_value)
            if dev_value > best_value:
                best_value = dev_value
                best_epoch = epoch
                best_params = _copy_params(params)

        selected = best_params if config.selection == "best" else params
        dev_value, _ = _score(selected, dev_seqs, dev_golds, label_seqs, enc_cfg,
                              config, manifest.metric, manifest.n_classes)
        test_value, _ = _score(selected, test_seqs, test_golds, label_seqs, enc_cfg,
                               config, manifest.metric, manifest.n_classes)
        report = _make_report(manifest, config, {"dev": dev_value, "test": test_value},
                              epoch_train_loss, step_losses, t0, best_epoch, step_index)
        return current_model(selected), report
    finally:
        set_default_dtype(previous_dtype)


def _make_report(manifest, config, values, epoch_train_loss, step_losses, t0,
                 best_epoch, optimizer_steps) -> MetricsReport:
    return MetricsReport(metric_name=manifest.metric, values=values,
                         epoch_train_loss=list(epoch_train_loss),
                         step_losses=list(step_losses),
                         wall_seconds=time.perf_counter() - t0, seed=config.seed,
                         config_digest=config.digest(), best_epoch=best_epoch,
                         optimizer_steps=optimizer_steps)


def _cached_bank(params, label_seqs, enc_cfg, config) -> tuple[np.ndarray, np.ndarray | None]:
    bank = label_bank(config.paradigm, label_seqs, params, enc_cfg,
                      pool_mode=config.pool_mode,
                      pool_full_prompt=config.pool_full_prompt)
    return bank.vectors.data, None if bank.bias is None else bank.bias.data


def _score(params, seqs, golds, label_seqs, enc_cfg, config, metric_id, n_classes,
           eval_batch: int = 64) -> tuple[float, list[int]]:
    """Metric over a split with the label bank computed once."""
    bank_vectors, bank_bias = _cached_bank(params, label_seqs, enc_cfg, config)
    predictions: list[int] = []
    for start in range(0, len(seqs), eval_batch):
        chunk = seqs[start:start + eval_batch]
        ids, real = pad_batch(chunk)
        H = forward_batch(ids, params, enc_cfg, real_mask=real)
        h = input_reprs_batch(config.paradigm, H, chunk).data
        logits = h @ bank_vectors.T
        if bank_bias is not None:
            logits = logits + bank_bias
        predictions.extend(int(i) for i in np.argmax(logits, axis=1))
    gold_list = [int(g) for g in golds]
    # Single-label identity check: micro-F1 must equal accuracy.
    assert abs(micro_f1(predictions, gold_list, n_classes)
               - accuracy(predictions, gold_list)) < 1e-12
    return compute_metric(metric_id, predictions, gold_list, n_classes), predictions


def evaluate(model: TrainedModel, dataset: LoadedDataset, split: str = "dev",
             metric_id: str | None = None) -> tuple[MetricsReport, list[int]]:
    """Score a trained model on one split; the label bank is cached once."""
    manifest = dataset.manifest
    if split not in dataset.splits:
        raise ConfigError(f"unknown split {split!r}")
    metric_id = metric_id or manifest.metric
    if len(manifest.labels) != len(model.labels.names):
        raise ConfigError("checkpoint and manifest disagree on label count")
    t0 = time.perf_counter()
    examples = dataset.split(split)
    seqs, golds = _encode_examples(examples, manifest, model.run_config, model.vocab)
    value, predictions = _score(model.params, seqs, golds, model.label_seqs,
                                model.encoder_config, model.run_config, metric_id,
                                manifest.n_classes)
    report = MetricsReport(metric_name=metric_id, values={split: value},
                           epoch_train_loss=[], step_losses=[],
                           wall_seconds=time.perf_counter() - t0,
                           seed=model.run_config.seed,
                           config_digest=model.run_config.digest())
    return report, predictions


# ---------------------------------------------------------------------------
# experiment orchestration
# ---------------------------------------------------------------------------


@dataclass
class RunRecord:
    run_id: str
    paradigm: str
    dataset: str
    template: str
    seed: int
    metric: str
    value: float
    wall_seconds: float
    config: dict
    split_values: dict = field(default_factory=dict)
    failed: bool = False
    error: str = ""


def _run_record(config, dataset_name, report, label=None) -> RunRecord:
    return RunRecord(
        run_id=f"{config.paradigm.value}-{config.label_template}-s{config.seed}-"
               f"{config.digest()[:8]}",
        paradigm=config.paradigm.value, dataset=dataset_name,
        template=config.label_template, seed=config.seed,
        metric=report.metric_name, value=report.values["dev"],
        wall_seconds=report.wall_seconds, config=config.as_dict(),
        split_values=dict(report.values))


@dataclass
class ComparisonCell:
    paradigm: str
    seeds: list[int]
    values: list[float]
    failures: list[int] = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean(self.values)) if self.values else math.nan

    @property
    def spread(self) -> float:
        return float(np.std(self.values)) if self.values else math.nan


@dataclass
class ComparisonTable:
    dataset_name: str
    metric: str
    cells: dict[str, ComparisonCell]
    records: list[RunRecord]

    def to_text(self) -> str:
        lines = [f"dataset: {self.dataset_name}   metric: {self.metric}"]
        width = max(len(p) for p in self.cells)
        for paradigm, cell in self.cells.items():
            if cell.values:
                body = f"{cell.mean:.4f} +/- {cell.spread:.4f}  (seeds {cell.seeds})"
            else:
                body = "all runs failed"
            if cell.failures:
                body += f"  [failed seeds: {cell.failures}]"
            lines.append(f"  {paradigm:<{width}}  {body}")
        return "\n".join(lines)


def compare(base_config: TrainRunConfig, dataset: LoadedDataset,
            paradigms=("ft", "pt", "sm", "mm"), seeds=(0, 1, 2),
            dataset_name: str = "dataset") -> ComparisonTable:
    """Train every paradigm with every seed under otherwise identical settings.

    A failed run marks its cell and the sweep continues.
    """
    cells: dict[str, ComparisonCell] = {}
    records: list[RunRecord] = []
    for code in paradigms:
        kind = PARADIGM_CODES.get(code) or ParadigmKind(code)
        cell = ComparisonCell(paradigm=kind.value, seeds=[], values=[])
        for seed in seeds:
            config = replace(base_config, paradigm=kind, seed=seed)
            try:
                _, report = train(config, dataset)
            except Exception as exc:  # noqa: BLE001 - isolate per-run failures
                log.warning("run failed (%s, seed %d): %s", kind.value, seed, exc)
                cell.failures.append(seed)
                records.append(RunRecord(
                    run_id=f"{kind.value}-{config.label_template}-s{seed}-failed",
                    paradigm=kind.value, dataset=dataset_name,
                    template=config.label_template, seed=seed,
                    metric=dataset.manifest.metric, value=math.nan,
                    wall_seconds=0.0, config=config.as_dict(),
                    failed=True, error=str(exc)))
                continue
            cell.seeds.append(seed)
            cell.values.append(report.values["dev"])
            records.append(_run_record(config, dataset_name, report))
        cells[kind.value] = cell
    return ComparisonTable(dataset_name=dataset_name, metric=dataset.manifest.metric,
                           cells=cells, records=records)


@dataclass
class TemplateSweepReport:
    dataset_name: str
    metric: str
    default_template: str
    cells: dict[str, ComparisonCell]
    records: list[RunRecord]

    @property
    def max_min_spread(self) -> float:
        means = [cell.mean for cell in self.cells.values() if cell.values]
        return max(means) - min(means) if means else math.nan

    def to_text(self) -> str:
        lines = [f"dataset: {self.dataset_name}   metric: {self.metric}",
                 f"headline max-min spread over templates: {self.max_min_spread:.4f}"]
        for template, cell in self.cells.items():
            marker = "  (default)" if template == self.default_template else ""
            lines.append(f"  {template}  {cell.mean:.4f} +/- {cell.spread:.4f}{marker}")
        return "\n".join(lines)


def sweep_templates(base_config: TrainRunConfig, dataset: LoadedDataset,
                    templates=LABEL_TEMPLATE_IDS, seeds=(0, 1, 2),
                    dataset_name: str = "dataset") -> TemplateSweepReport:
    """One full run per label template, same seeds throughout."""
    if base_config.paradigm is not ParadigmKind.MASK_MATCH:
        raise ConfigError("template sweeps are defined for the mask_match paradigm")
    for template in templates:
        if template not in LABEL_TEMPLATE_IDS:
            raise ConfigError(f"unknown label template {template!r}")
    cells: dict[str, ComparisonCell] = {}
    records: list[RunRecord] = []
    for template in templates:
        cell = ComparisonCell(paradigm="mask_match", seeds=[], values=[])
        for seed in seeds:
            config = replace(base_config, label_template=template, seed=seed)
            _, report = train(config, dataset)
            cell.seeds.append(seed)
            cell.values.append(report.values["dev"])
            records.append(_run_record(config, dataset_name, report))
        cells[template] = cell
    return TemplateSweepReport(dataset_name=dataset_name, metric=dataset.manifest.metric,
                               default_template=DEFAULT_LABEL_TEMPLATE, cells=cells,
                               records=records)


# ---------------------------------------------------------------------------
# result and checkpoint persistence
# ---------------------------------------------------------------------------


def write_results_csv(records: list[RunRecord], path) -> None:
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_CSV_COLUMNS)
        for r in records:
            writer.writerow([r.run_id, r.paradigm, r.dataset, r.template, r.seed,
                             r.metric, f"{r.value:.6f}", f"{r.wall_seconds:.3f}"])


def write_results_json(records: list[RunRecord], path) -> None:
    payload = []
    for r in records:
        payload.append({
            "run_id": r.run_id, "paradigm": r.paradigm, "dataset": r.dataset,
            "template": r.template, "seed": r.seed, "metric": r.metric,
            "value": r.value, "wall_seconds": r.wall_seconds,
            "split_values": r.split_values, "failed": r.failed, "error": r.error,
            "config": r.config,
        })
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def save_model(model: TrainedModel, out_dir) -> tuple:
    """Write checkpoint + vocab side file; returns both paths."""
    from pathlib import Path

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    vocab_path = out_dir / "vocab.txt"
    model.vocab.save(vocab_path)
    meta = dict(model.encoder_config.to_meta())
    meta.update({
        "paradigm": model.run_config.paradigm.value,
        "label_template": model.run_config.label_template,
        "augmentation": int(model.run_config.augmentation),
        "n_labels": len(model.labels),
        "max_input_length": model.run_config.max_input_length,
        "temperature": model.run_config.temperature,
        "pool_mode": model.run_config.pool_mode,
        "pool_full_prompt": int(model.run_config.pool_full_prompt),
        "pair_sep": int(model.run_config.pair_sep),
        "dtype": model.run_config.dtype,
        "seed": model.run_config.seed,
        "vocab_file": vocab_path.name,
    })
    ckpt_path = out_dir / "model.ckpt"
    save_checkpoint(ckpt_path, model.params, meta)
    return ckpt_path, vocab_path


def load_model(ckpt_path, manifest: DatasetManifest) -> TrainedModel:
    """Rebuild a TrainedModel from a checkpoint and the dataset manifest."""
    from pathlib import Path

    ckpt_path = Path(ckpt_path)
    params, meta = load_checkpoint(ckpt_path)
    enc_cfg = EncoderConfig.from_meta(meta)
    vocab = Vocab.load(ckpt_path.parent / meta["vocab_file"])
    config = TrainRunConfig(
        paradigm=meta["paradigm"],
        layers=enc_cfg.layers, hidden_dim=enc_cfg.hidden_dim, heads=enc_cfg.heads,
        ffn_dim=enc_cfg.ffn_dim, max_positions=enc_cfg.max_positions,
        label_template=meta["label_template"],
        augmentation=bool(int(meta["augmentation"])),
        max_input_length=int(meta["max_input_length"]),
        temperature=float(meta["temperature"]),
        pool_mode=meta["pool_mode"],
        pool_full_prompt=bool(int(meta["pool_full_prompt"])),
        pair_sep=bool(int(meta["pair_sep"])),
        dtype=meta["dtype"], seed=int(meta["seed"]),
    )
    if int(meta["n_labels"]) != manifest.n_classes:
        raise ConfigError(
            f"checkpoint was trained with {meta['n_labels']} labels but the manifest "
            f"defines {manifest.n_classes}")
    labels = _build_label_set(manifest, config)
    label_seqs = render_label_set(labels, vocab, config.max_input_length)
    return TrainedModel(run_config=config, encoder_config=enc_cfg, params=params,
                        vocab=vocab, labels=labels, label_seqs=label_seqs)
