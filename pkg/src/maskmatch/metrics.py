"""Accuracy, micro-F1, and macro-F1 for single-label multiclass predictions.

For single-label data micro-F1 equals accuracy (every error is one false
positive and one false negative); evaluation asserts this identity as a
cheap self-check. Macro-F1 averages per-class F1 over all defined classes,
scoring classes with no gold and no predictions as 0.
"""

from __future__ import annotations

from .errors import ConfigError


def _counts(predictions, golds, n_classes):
    if len(predictions) != len(golds):
        raise ConfigError(
            f"{len(predictions)} predictions vs {len(golds)} gold labels"
        )
    if not predictions:
        raise ConfigError("cannot score an empty prediction list")
    tp = [0] * n_classes
    fp = [0] * n_classes
    fn = [0] * n_classes
    for pred, gold in zip(predictions, golds):
        if pred == gold:
            tp[gold] += 1
        else:
            fp[pred] += 1
            fn[gold] += 1
    return tp, fp, fn


def accuracy(predictions, golds, n_classes: int | None = None) -> float:
    if len(predictions) != len(golds) or not predictions:
        raise ConfigError("prediction/gold length mismatch or empty input")
    return sum(p == g for p, g in zip(predictions, golds)) / len(predictions)


def micro_f1(predictions, golds, n_classes: int) -> float:
    tp, fp, fn = _counts(predictions, golds, n_classes)
    total_tp, total_fp, total_fn = sum(tp), sum(fp), sum(fn)
    denom = 2 * total_tp + total_fp + total_fn
    return 2 * total_tp / denom if denom else 0.0


def macro_f1(predictions, golds, n_classes: int) -> float:
    tp, fp, fn = _counts(predictions, golds, n_classes)
    per_class = []
    for c in range(n_classes):
        denom = 2 * tp[c] + fp[c] + fn[c]
        per_class.append(2 * tp[c] / denom if denom else 0.0)
    return sum(per_class) / n_classes


_METRIC_FNS = {"accuracy": accuracy, "micro_f1": micro_f1, "macro_f1": macro_f1}


def compute_metric(metric_id: str, predictions, golds, n_classes: int) -> float:
    if metric_id not in _METRIC_FNS:
        raise ConfigError(f"unknown metric {metric_id!r}")
    return _METRIC_FNS[metric_id](predictions, golds, n_classes)
