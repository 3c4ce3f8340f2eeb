"""Prediction and loss across the four paradigms, against brute-force oracles."""

import math

import numpy as np
import pytest

from maskmatch.encoder import EncoderConfig, forward, forward_batch, init_encoder_params, pad_batch
from maskmatch.errors import ContractError
from maskmatch.numerics import GradTape, Tensor, matmul, softmax, transpose
from maskmatch.paradigms import (
    LabelBank,
    ParadigmKind,
    init_head_params,
    input_repr,
    label_bank,
    loss,
    predict,
)
from maskmatch.prompts import LabelSet, render_label_set
from maskmatch.tokenizer import CLS_ID, MASK_ID, TokenSequence, build_vocab

CFG = EncoderConfig(vocab_size=30, layers=1, hidden_dim=8, heads=2,
                    ffn_dim=12, max_positions=24)


def _brute_force(h, bank, bias=None):
    """Explicit dot-product loops plus log-sum-exp, independent of the library."""
    n = bank.shape[0]
    logits = []
    for i in range(n):
        acc = 0.0
        for j in range(bank.shape[1]):
            acc += h[j] * bank[i, j]
        if bias is not None:
            acc += bias[i]
        logits.append(acc)
    m = max(logits)
    lse = m + math.log(sum(math.exp(z - m) for z in logits))
    probs = [math.exp(z - lse) for z in logits]
    return np.asarray(probs), int(np.argmax(logits)), lse


class TestPredict:
    def test_closed_form_two_class(self):
        h = Tensor([1.0, 0.0])
        bank = LabelBank(vectors=Tensor([[1.0, 0.0], [0.0, 1.0]]))
        pred = predict(h, bank)
        np.testing.assert_allclose(pred.probabilities, [0.73105857863, 0.26894142137],
                                   atol=1e-8)
        assert pred.argmax == 0 and not pred.tie

    def test_identical_rows_tie_to_lowest_index(self):
        bank = LabelBank(vectors=Tensor([[1.0, 1.0]] * 3))
        pred = predict(Tensor([0.5, 0.5]), bank)
        np.testing.assert_allclose(pred.probabilities, [1 / 3] * 3, atol=1e-12)
        assert pred.argmax == 0 and pred.tie

    def test_shift_invariance(self):
        rng = np.random.default_rng(0)
        h = rng.normal(size=4)
        bank_rows = rng.normal(size=(3, 4))
        base = predict(Tensor(h), LabelBank(vectors=Tensor(bank_rows)))
        shifted = predict(Tensor(h), LabelBank(vectors=Tensor(bank_rows),
                                               bias=Tensor([2.5, 2.5, 2.5])))
        np.testing.assert_allclose(shifted.probabilities, base.probabilities, atol=1e-12)
        assert shifted.argmax == base.argmax

    def test_positive_rescaling_keeps_argmax(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            h = rng.normal(size=5)
            bank = rng.normal(size=(4, 5))
            a = predict(Tensor(h), LabelBank(vectors=Tensor(bank)))
            b = predict(Tensor(h), LabelBank(vectors=Tensor(bank)), temperature=0.25)
            assert a.argmax == b.argmax

    def test_width_mismatch(self):
        with pytest.raises(ContractError, match="width"):
            predict(Tensor([1.0, 2.0, 3.0]), LabelBank(vectors=Tensor([[1.0, 2.0]])))

    def test_brute_force_oracle_agreement(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            n = int(rng.integers(2, 9))
            d = int(rng.integers(2, 12))
            h = rng.normal(size=d)
            bank_rows = rng.normal(size=(n, d))
            probs, argmax, _ = _brute_force(h, bank_rows)
            pred = predict(Tensor(h), LabelBank(vectors=Tensor(bank_rows)))
            np.testing.assert_allclose(pred.probabilities, probs, atol=1e-10)
            assert pred.argmax == argmax

    def test_probabilities_sum_to_one(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            pred = predict(Tensor(rng.normal(size=6)),
                           LabelBank(vectors=Tensor(rng.normal(size=(5, 6)))))
            assert abs(pred.probabilities.sum() - 1.0) <= 1e-12


class TestLoss:
    def test_uniform_bank_gives_log_n(self):
        bank = LabelBank(vectors=Tensor(np.ones((4, 3))))
        value = loss(Tensor([0.2, -0.1, 0.5]), bank, 0)
        assert value.item() == pytest.approx(math.log(4), abs=1e-12)

    def test_closed_form_value(self):
        bank = LabelBank(vectors=Tensor([[1.0, 0.0], [0.0, 1.0]]))
        value = loss(Tensor([1.0, 0.0]), bank, 0)
        assert value.item() == pytest.approx(0.31326, abs=1e-4)

    def test_brute_force_loss_agreement(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            n = int(rng.integers(2, 9))
            d = int(rng.integers(2, 10))
            h = rng.normal(size=d)
            bank_rows = rng.normal(size=(n, d))
            gold = int(rng.integers(0, n))
            probs, _, _ = _brute_force(h, bank_rows)
            expect = -math.log(probs[gold])
            got = loss(Tensor(h), LabelBank(vectors=Tensor(bank_rows)), gold).item()
            assert abs(got - expect) <= 1e-10

    def test_batched_mean(self):
        rng = np.random.default_rng(13)
        h = rng.normal(size=(4, 6))
        bank_rows = rng.normal(size=(3, 6))
        golds = [0, 2, 1, 0]
        batched = loss(Tensor(h), LabelBank(vectors=Tensor(bank_rows)), golds).item()
        singles = [loss(Tensor(h[i]), LabelBank(vectors=Tensor(bank_rows)), golds[i]).item()
                   for i in range(4)]
        assert batched == pytest.approx(np.mean(singles), abs=1e-12)


class TestInputRepr:
    def _h(self, seq, params):
        return forward(seq, params, CFG)

    def test_mask_match_uses_mask_row(self):
        params = init_encoder_params(CFG, np.random.default_rng(0))
        seq = TokenSequence(ids=[9, 10, MASK_ID, 11], mask_positions=[2])
        H = self._h(seq, params)
        for kind in (ParadigmKind.MASK_MATCH, ParadigmKind.PROMPT_TUNE,
                     ParadigmKind.SEMANTIC_MATCH):
            rep = input_repr(kind, H, seq)
            np.testing.assert_array_equal(rep.vector.data, H.data[2])

    def test_fine_tune_uses_cls_row(self):
        params = init_encoder_params(CFG, np.random.default_rng(0))
        seq = TokenSequence(ids=[CLS_ID, 9, 10], mask_positions=[])
        H = self._h(seq, params)
        rep = input_repr(ParadigmKind.FINE_TUNE, H, seq)
        np.testing.assert_array_equal(rep.vector.data, H.data[0])

    def test_fine_tune_rejects_prompted_encoding(self):
        params = init_encoder_params(CFG, np.random.default_rng(0))
        seq = TokenSequence(ids=[CLS_ID, MASK_ID], mask_positions=[1])
        H = self._h(seq, params)
        with pytest.raises(ContractError):
            input_repr(ParadigmKind.FINE_TUNE, H, seq)

    def test_deterministic(self):
        params = init_encoder_params(CFG, np.random.default_rng(0))
        seq = TokenSequence(ids=[9, MASK_ID], mask_positions=[1])
        a = input_repr(ParadigmKind.MASK_MATCH, self._h(seq, params), seq)
        b = input_repr(ParadigmKind.MASK_MATCH, self._h(seq, params), seq)
        np.testing.assert_array_equal(a.vector.data, b.vector.data)


@pytest.fixture
def label_fixture():
    # Function scope: gradients accumulate on params by design, so tests
    # must not share parameter tensors.
    vocab = build_vocab(
        ["natural language inference paraphrase contradiction entailment neutral "
         "is [MASK] . the meaning of means similar to ,"], min_count=1)
    params = init_encoder_params(
        EncoderConfig(vocab_size=len(vocab), layers=1, hidden_dim=8, heads=2,
                      ffn_dim=12, max_positions=24),
        np.random.default_rng(3))
    config = EncoderConfig(vocab_size=len(vocab), layers=1, hidden_dim=8, heads=2,
                           ffn_dim=12, max_positions=24)
    return vocab, params, config


class TestLabelBank:
    def test_mask_match_bank_rows_are_mask_states(self, label_fixture):
        vocab, params, config = label_fixture
        labels = LabelSet(names=["entailment", "contradiction", "neutral"])
        seqs = render_label_set(labels, vocab)
        bank = label_bank(ParadigmKind.MASK_MATCH, seqs, params, config)
        assert bank.vectors.shape == (3, config.hidden_dim)
        ids, real = pad_batch(seqs)
        H = forward_batch(ids, params, config).data
        for i, seq in enumerate(seqs):
            np.testing.assert_allclose(bank.vectors.data[i], H[i, seq.single_mask()],
                                       atol=1e-12)

    def test_semantic_match_pools_name_span(self, label_fixture):
        vocab, params, config = label_fixture
        labels = LabelSet(names=["natural language inference", "paraphrase"])
        seqs = render_label_set(labels, vocab)
        bank = label_bank(ParadigmKind.SEMANTIC_MATCH, seqs, params, config)
        ids, real = pad_batch(seqs)
        H = forward_batch(ids, params, config, real_mask=real).data
        start, stop = seqs[0].name_span
        assert (start, stop) == (0, 3)
        expect = H[0, start:stop].max(axis=0)  # coordinate-wise max oracle
        np.testing.assert_allclose(bank.vectors.data[0], expect, atol=1e-12)

    def test_prompt_tune_bank_is_initialization(self, label_fixture):
        vocab, params, config = label_fixture
        head = init_head_params(ParadigmKind.PROMPT_TUNE, 3, config.hidden_dim,
                                np.random.default_rng(0))
        merged = {**params, **head}
        bank = label_bank(ParadigmKind.PROMPT_TUNE, [], merged, config)
        np.testing.assert_array_equal(bank.vectors.data, head["head.virtual"].data)

    def test_mask_match_label_side_gradient_flows(self, label_fixture):
        vocab, params, config = label_fixture
        labels = LabelSet(names=["entailment", "contradiction"])
        seqs = render_label_set(labels, vocab)
        h = Tensor(np.random.default_rng(1).normal(size=config.hidden_dim))
        with GradTape() as tape:
            bank = label_bank(ParadigmKind.MASK_MATCH, seqs, params, config)
            value = loss(h, bank, 0)
        tape.backward(value)
        label_token = vocab.id_of("entailment")
        assert np.abs(params["tok_emb"].grad[label_token]).max() > 0

    def test_prompt_tune_encoder_gets_zero_gradient_from_bank(self, label_fixture):
        vocab, params, config = label_fixture
        head = init_head_params(ParadigmKind.PROMPT_TUNE, 2, config.hidden_dim,
                                np.random.default_rng(0))
        merged = {**params, **head}
        h = Tensor(np.random.default_rng(1).normal(size=config.hidden_dim))
        with GradTape() as tape:
            bank = label_bank(ParadigmKind.PROMPT_TUNE, [], merged, config)
            value = loss(h, bank, 0)
        tape.backward(value)
        np.testing.assert_array_equal(params["tok_emb"].grad,
                                      np.zeros_like(params["tok_emb"].data))
        assert np.abs(head["head.virtual"].grad).max() > 0

    def test_finite_difference_probe_on_label_embedding(self, label_fixture):
        vocab, params, config = label_fixture
        labels = LabelSet(names=["entailment", "contradiction"])
        seqs = render_label_set(labels, vocab)
        h = Tensor(np.random.default_rng(2).normal(size=config.hidden_dim))
        with GradTape() as tape:
            value = loss(h, label_bank(ParadigmKind.MASK_MATCH, seqs, params, config), 1)
        tape.backward(value)
        token, coord = vocab.id_of("contradiction"), 3
        analytic = params["tok_emb"].grad[token, coord]
        eps = 1e-6
        vals = []
        for delta in (+eps, -eps):
            params["tok_emb"].data[token, coord] += delta
            vals.append(loss(h, label_bank(ParadigmKind.MASK_MATCH, seqs, params, config), 1).item())
            params["tok_emb"].data[token, coord] -= delta
        numeric = (vals[0] - vals[1]) / (2 * eps)
        assert analytic == pytest.approx(numeric, abs=1e-6)


def test_paradigm_degeneracy_identical_probabilities():
    # hidden_dim == n, one-hot h, identity bank: all four paradigms agree.
    n = 4
    h = Tensor(np.eye(n)[1])
    eye = np.eye(n)
    preds = [
        predict(h, LabelBank(vectors=Tensor(eye), bias=Tensor(np.zeros(n)))),  # fine_tune form
        predict(h, LabelBank(vectors=Tensor(eye))),  # prompt_tune form
        predict(h, LabelBank(vectors=Tensor(eye))),  # semantic_match form
        predict(h, LabelBank(vectors=Tensor(eye))),  # mask_match form
    ]
    for pred in preds[1:]:
        np.testing.assert_array_equal(pred.probabilities, preds[0].probabilities)
        assert pred.argmax == preds[0].argmax == 1


def test_eq1_fidelity_against_manual_composition():
    rng = np.random.default_rng(21)
    h = rng.normal(size=6)
    rows = rng.normal(size=(4, 6))
    pred = predict(Tensor(h), LabelBank(vectors=Tensor(rows)))
    manual = softmax(matmul(Tensor(h), transpose(Tensor(rows)))).data
    np.testing.assert_array_equal(pred.probabilities, manual)
