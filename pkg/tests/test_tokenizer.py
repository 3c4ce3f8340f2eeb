"""Vocabulary building, encoding, truncation, and the vocab file format."""

import numpy as np
import pytest

from maskmatch.errors import ContractError, DataError
from maskmatch.tokenizer import (
    MASK_ID,
    PAD_ID,
    RESERVED_TOKENS,
    TokenSequence,
    Vocab,
    build_vocab,
    decode,
    encode,
    tokenize,
)


class TestBuildVocab:
    def test_min_count_filters_rare_tokens(self):
        vocab = build_vocab(["a b", "a c"], min_count=2)
        assert "a" in vocab
        assert "b" not in vocab
        assert "c" not in vocab
        assert encode("b", vocab).ids == [1]  # [UNK]

    def test_mask_reserved_exactly_once(self):
        vocab = build_vocab(["some text with [MASK] inside [MASK]"], min_count=1)
        assert vocab.id_to_token.count("[MASK]") == 1
        assert vocab.id_of("[MASK]") == MASK_ID

    def test_lowercasing(self):
        vocab = build_vocab(["Currently Ritek is the largest"], min_count=1)
        assert "ritek" in vocab
        assert "Ritek" not in vocab

    def test_empty_corpus_rejected(self):
        with pytest.raises(DataError):
            build_vocab([], min_count=1)

    def test_reserved_tokens_at_fixed_low_ids(self):
        vocab = build_vocab(["hello"], min_count=1)
        for idx, token in enumerate(RESERVED_TOKENS):
            assert vocab.id_of(token) == idx


class TestTokenize:
    def test_punctuation_split(self):
        assert tokenize("It is great.") == ["it", "is", "great", "."]

    def test_special_tokens_survive(self):
        assert tokenize("x [MASK] y [SEP] [E1] z [/E1]") == [
            "x", "[MASK]", "y", "[SEP]", "[E1]", "z", "[/E1]",
        ]

    def test_no_punct_split_mode(self):
        assert tokenize("it is great.", split_punct=False) == ["it", "is", "great."]


class TestEncode:
    @pytest.fixture
    def vocab(self):
        return build_vocab(["it is great and long words here for tests ."], min_count=1)

    def test_mask_position_recorded(self, vocab):
        seq = encode("it is [MASK]", vocab)
        assert seq.ids[-1] == MASK_ID
        assert seq.mask_positions == [2]

    def test_truncation_preserves_suffix(self, vocab):
        body = " ".join(["words"] * 600)
        seq = encode(body, vocab, max_len=50, suffix="it is [MASK] .")
        assert len(seq) == 50
        tail = [vocab.token_of(i) for i in seq.ids[-4:]]
        assert tail == ["it", "is", "[MASK]", "."]
        assert seq.mask_positions == [48]

    def test_empty_body_gives_exactly_prompt(self, vocab):
        seq = encode("", vocab, suffix="it is [MASK]")
        assert [vocab.token_of(i) for i in seq.ids] == ["it", "is", "[MASK]"]

    def test_suffix_longer_than_max_len_rejected(self, vocab):
        with pytest.raises(ContractError):
            encode("x", vocab, max_len=2, suffix="it is [MASK]")

    def test_deterministic(self, vocab):
        a = encode("it is great", vocab)
        b = encode("it is great", vocab)
        assert a.ids == b.ids and a.mask_positions == b.mask_positions

    def test_roundtrip_in_vocab_tokens(self, vocab):
        seq = encode("It IS great", vocab)
        assert decode(seq, vocab) == "it is great"

    def test_unknown_maps_to_unk(self, vocab):
        seq = encode("zebra", vocab)
        assert seq.ids == [1]


class TestVocabFile:
    def test_save_load_roundtrip(self, tmp_path):
        vocab = build_vocab(["alpha beta beta gamma ."], min_count=1)
        path = tmp_path / "vocab.txt"
        vocab.save(path)
        loaded = Vocab.load(path)
        assert loaded.token_to_id == vocab.token_to_id
        assert loaded.id_to_token == vocab.id_to_token

    def test_file_is_line_oriented_reserved_first(self, tmp_path):
        vocab = build_vocab(["alpha"], min_count=1)
        path = tmp_path / "vocab.txt"
        vocab.save(path)
        raw = path.read_bytes()
        assert b"\r" not in raw
        lines = raw.decode("utf-8").splitlines()
        assert lines[0] == "[PAD]\t0"
        assert lines[4] == "[MASK]\t4"
        assert lines[-1] == f"alpha\t{len(vocab) - 1}"

    def test_corrupt_file_rejected_with_location(self, tmp_path):
        path = tmp_path / "vocab.txt"
        path.write_text("[PAD]\t0\nbroken line\n", encoding="utf-8")
        with pytest.raises(DataError, match="vocab.txt:2"):
            Vocab.load(path)


def test_single_mask_contract():
    seq = TokenSequence(ids=[5, MASK_ID, 6], mask_positions=[1])
    assert seq.single_mask() == 1
    with pytest.raises(ContractError):
        TokenSequence(ids=[5, 6], mask_positions=[]).single_mask()


def test_pad_id_is_zero():
    assert PAD_ID == 0
