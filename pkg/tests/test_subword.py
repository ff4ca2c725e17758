import random
import string

import pytest
from hypothesis import given, strategies as st

from ts_toolkit import subword
from ts_toolkit.corpus_io import RESERVED, UNK
from ts_toolkit.subword import (
    EmptyCorpusError,
    apply_bpe,
    decode,
    encode,
    learn_bpe,
    load_model,
    save_model,
    undo_bpe,
)


def classic_corpus():
    words = ["low"] * 5 + ["lower"] * 2 + ["newest"] * 6 + ["widest"] * 3
    return [words]


class TestLearnBpe:
    def test_zero_merges_is_character_level(self):
        model = learn_bpe([["abc"]], 0)
        assert model.merges == []
        assert apply_bpe(model, ["abc"]) == ["a", "b", "c", subword.EOW]

    def test_first_merge_on_repeated_word(self):
        model = learn_bpe([["abab"]], 1)
        assert model.merges[0] == ("a", "b")

    def test_classic_corpus_first_merges(self):
        model = learn_bpe(classic_corpus(), 2)
        assert model.merges[0] == ("e", "s")
        assert model.merges[1] == ("es", "t")

    def test_empty_corpus_rejected(self):
        with pytest.raises(EmptyCorpusError):
            learn_bpe([], 10)

    def test_reserved_symbols_have_lowest_ids(self):
        model = learn_bpe(classic_corpus(), 10)
        for i, sym in enumerate(RESERVED):
            assert model.vocab[sym] == i
        assert all(v >= len(RESERVED) for k, v in model.vocab.items() if k not in RESERVED)

    def test_deterministic(self):
        a = learn_bpe(classic_corpus(), 20)
        b = learn_bpe(classic_corpus(), 20)
        assert a.merges == b.merges
        assert a.vocab == b.vocab


class TestApplyUndo:
    def test_fully_merged_word_is_single_token(self):
        model = learn_bpe([["low"] * 3], 10)
        assert apply_bpe(model, ["low"]) == ["low" + subword.EOW]

    def test_empty_input(self):
        model = learn_bpe(classic_corpus(), 5)
        assert apply_bpe(model, []) == []
        assert undo_bpe([]) == []

    def test_round_trip_random_words(self):
        model = learn_bpe(classic_corpus(), 8)
        rng = random.Random(0)
        words = [
            "".join(rng.choice(string.ascii_lowercase) for _ in range(rng.randint(1, 12)))
            for _ in range(1000)
        ]
        assert undo_bpe(apply_bpe(model, words)) == words

    @given(st.lists(st.text(alphabet="lowestnewid", min_size=1, max_size=10), max_size=6))
    def test_round_trip_property(self, words):
        model = learn_bpe(classic_corpus(), 12)
        assert undo_bpe(apply_bpe(model, words)) == words

    def test_reserved_pass_through(self):
        model = learn_bpe(classic_corpus(), 5)
        for sym in RESERVED:
            assert apply_bpe(model, [sym]) == [sym]
            assert undo_bpe([sym]) == [sym]

    def test_unknown_characters_pass_through(self):
        model = learn_bpe(classic_corpus(), 5)
        tokens = apply_bpe(model, ["zq"])
        assert undo_bpe(tokens) == ["zq"]
        # mapped to <unk> only at id-encoding time
        unk_id = model.vocab[UNK]
        assert unk_id in encode(model, tokens)


class TestVocabAndIds:
    def test_ids_dense(self):
        model = learn_bpe(classic_corpus(), 10)
        assert sorted(model.vocab.values()) == list(range(len(model.vocab)))

    def test_encode_decode_round_trip(self):
        model = learn_bpe(classic_corpus(), 10)
        tokens = apply_bpe(model, ["newest", "low"])
        assert decode(model, encode(model, tokens)) == tokens

    def test_save_load_stable(self, tmp_path):
        model = learn_bpe(classic_corpus(), 10)
        save_model(model, tmp_path / "merges.txt", tmp_path / "vocab.txt")
        loaded = load_model(tmp_path / "merges.txt", tmp_path / "vocab.txt")
        assert loaded.merges == model.merges
        assert loaded.vocab == model.vocab
        assert apply_bpe(loaded, ["newest"]) == apply_bpe(model, ["newest"])
