"""Byte-pair-encoding subword model: learning, application, and vocabulary.

Words are split into characters plus an end-of-word marker ``</w>``; merges
are learned greedily by pair frequency (ties broken lexicographically so
learning is deterministic).  Reserved symbols pass through BPE untouched and
occupy the lowest vocabulary ids.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from .corpus_io import RESERVED, UNK

EOW = "</w>"


class EmptyCorpusError(ValueError):
    pass


@dataclass
class SubwordModel:
    merges: list[tuple[str, str]]
    vocab: dict[str, int]
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def unk_id(self) -> int:
        return self.vocab[UNK]


def _word_symbols(word: str) -> tuple[str, ...]:
    return tuple(word) + (EOW,)


def _pair_counts(word_freqs: dict[tuple[str, ...], int]) -> Counter:
    counts: Counter = Counter()
    for symbols, freq in word_freqs.items():
        for a, b in zip(symbols, symbols[1:]):
            counts[(a, b)] += freq
    return counts


def _merge_word(symbols: tuple[str, ...], pair: tuple[str, str]) -> tuple[str, ...]:
    a, b = pair
    merged = []
    i = 0
    while i < len(symbols):
        if i + 1 < len(symbols) and symbols[i] == a and symbols[i + 1] == b:
            merged.append(a + b)
            i += 2
        else:
            merged.append(symbols[i])
            i += 1
    return tuple(merged)


def learn_bpe(corpus: Iterable[list[str]], num_merges: int) -> SubwordModel:
    """Learn ``num_merges`` greedy pair merges over a stream of token lists."""
    if num_merges < 0:
        raise ValueError("num_merges must be >= 0")
    word_counter: Counter = Counter()
    for sentence in corpus:
        for word in sentence:
            if word not in RESERVED:
                word_counter[word] += 1
    if not word_counter:
        raise EmptyCorpusError("cannot learn BPE from an empty corpus")

    word_freqs = {_word_symbols(w): c for w, c in word_counter.items()}
    symbols = set()
    for syms in word_freqs:
        symbols.update(syms)

    merges: list[tuple[str, str]] = []
    for _ in range(num_merges):
        counts = _pair_counts(word_freqs)
        if not counts:
            break
        best_count = max(counts.values())
        pair = min(p for p, c in counts.items() if c == best_count)
        merges.append(pair)
        symbols.add(pair[0] + pair[1])
        word_freqs = {_merge_word(syms, pair): freq for syms, freq in word_freqs.items()}

    vocab: dict[str, int] = {tok: i for i, tok in enumerate(RESERVED)}
    for sym in sorted(symbols):
        vocab[sym] = len(vocab)
    return SubwordModel(merges=merges, vocab=vocab)


def apply_bpe(model: SubwordModel, words: list[str]) -> list[str]:
    """Segment words into subword tokens; reserved symbols pass through."""
    out: list[str] = []
    for word in words:
        if word in RESERVED:
            out.append(word)
            continue
        cached = model._cache.get(word)
        if cached is None:
            symbols = _word_symbols(word)
            for pair in model.merges:
                if len(symbols) == 1:
                    break
                symbols = _merge_word(symbols, pair)
            cached = list(symbols)
            model._cache[word] = cached
        out.extend(cached)
    return out


def undo_bpe(tokens: list[str]) -> list[str]:
    """Rejoin subword tokens into words at end-of-word markers."""
    words: list[str] = []
    current = ""
    for token in tokens:
        if token in RESERVED:
            if current:
                words.append(current)
                current = ""
            words.append(token)
            continue
        current += token
        while EOW in current:
            word, current = current.split(EOW, 1)
            words.append(word)
    if current:
        words.append(current)
    return words


def encode(model: SubwordModel, tokens: list[str]) -> list[int]:
    unk = model.unk_id
    return [model.vocab.get(tok, unk) for tok in tokens]


def decode(model: SubwordModel, ids: list[int]) -> list[str]:
    inverse = {i: tok for tok, i in model.vocab.items()}
    return [inverse[i] for i in ids]


def save_model(model: SubwordModel, merges_path, vocab_path) -> None:
    with open(merges_path, "w", encoding="utf-8") as fh:
        for a, b in model.merges:
            fh.write(f"{a} {b}\n")
    with open(vocab_path, "w", encoding="utf-8") as fh:
        for tok, idx in model.vocab.items():
            fh.write(f"{tok} {idx}\n")


def load_model(merges_path, vocab_path) -> SubwordModel:
    merges = []
    with open(merges_path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            a, b = line.split(" ")
            merges.append((a, b))
    vocab = {}
    with open(vocab_path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            tok, idx = line.rsplit(" ", 1)
            vocab[tok] = int(idx)
    return SubwordModel(merges=merges, vocab=vocab)
