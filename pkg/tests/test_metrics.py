"""Metric implementations against hand-counted confusion cases and sklearn."""

import numpy as np
import pytest
from sklearn.metrics import f1_score

from maskmatch.errors import ConfigError
from maskmatch.metrics import accuracy, compute_metric, macro_f1, micro_f1


class TestHandCountedCases:
    def test_two_class_case(self):
        # predictions [A,A,B] vs gold [A,B,B]:
        #   class A: TP=1 FP=1 FN=0 -> F1 = 2/3
        #   class B: TP=1 FP=0 FN=1 -> F1 = 2/3
        preds, golds = [0, 0, 1], [0, 1, 1]
        assert accuracy(preds, golds) == pytest.approx(2 / 3)
        assert micro_f1(preds, golds, 2) == pytest.approx(2 / 3)
        assert macro_f1(preds, golds, 2) == pytest.approx(2 / 3)

    def test_all_correct(self):
        preds = golds = [0, 1, 2, 1, 0]
        for metric in ("accuracy", "micro_f1", "macro_f1"):
            assert compute_metric(metric, preds, golds, 3) == 1.0

    def test_single_class_gold_macro_penalized(self):
        # gold all class 0, one wrong prediction of class 1 on 4 examples:
        #   class 0: TP=3 FP=0 FN=1 -> F1 = 6/7
        #   class 1: TP=0 FP=1 FN=0 -> F1 = 0
        preds, golds = [0, 0, 0, 1], [0, 0, 0, 0]
        micro = micro_f1(preds, golds, 2)
        macro = macro_f1(preds, golds, 2)
        assert micro == pytest.approx(0.75)
        assert macro == pytest.approx((6 / 7) / 2)
        assert macro < micro


def test_micro_f1_equals_accuracy_single_label():
    rng = np.random.default_rng(0)
    for _ in range(30):
        n = int(rng.integers(2, 7))
        count = int(rng.integers(1, 60))
        preds = rng.integers(0, n, size=count).tolist()
        golds = rng.integers(0, n, size=count).tolist()
        assert micro_f1(preds, golds, n) == pytest.approx(accuracy(preds, golds), abs=1e-12)


def test_matches_sklearn_reference():
    rng = np.random.default_rng(1)
    for _ in range(20):
        n = int(rng.integers(2, 6))
        count = int(rng.integers(5, 80))
        preds = rng.integers(0, n, size=count)
        golds = rng.integers(0, n, size=count)
        labels = list(range(n))
        assert micro_f1(preds.tolist(), golds.tolist(), n) == pytest.approx(
            f1_score(golds, preds, labels=labels, average="micro", zero_division=0))
        assert macro_f1(preds.tolist(), golds.tolist(), n) == pytest.approx(
            f1_score(golds, preds, labels=labels, average="macro", zero_division=0))


def test_metric_values_stay_in_unit_interval():
    rng = np.random.default_rng(2)
    for _ in range(20):
        preds = rng.integers(0, 3, size=25).tolist()
        golds = rng.integers(0, 3, size=25).tolist()
        for metric in ("accuracy", "micro_f1", "macro_f1"):
            value = compute_metric(metric, preds, golds, 3)
            assert 0.0 <= value <= 1.0


def test_errors():
    with pytest.raises(ConfigError):
        compute_metric("auc", [0], [0], 2)
    with pytest.raises(ConfigError):
        accuracy([0, 1], [0])
    with pytest.raises(ConfigError):
        micro_f1([], [], 2)
