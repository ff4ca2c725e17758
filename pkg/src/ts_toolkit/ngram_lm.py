"""Order-n language model with interpolated Kneser-Ney or add-k smoothing.

Used by the alignment-based synthetic-corpus filter: a candidate replacement
is kept only when it lowers sentence perplexity by at least the configured
margin.  Probabilities are normalized per context and strictly positive for
every in-vocabulary word.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable

from .corpus_io import BOS, EOS, UNK

FORMAT_HEADER = "tslm v1"
KN_DISCOUNT = 0.75


class EmptyCorpusError(ValueError):
    pass


@dataclass
class NGramModel:
    order: int
    smoothing: str  # "kn" | "addk"
    k: float
    vocab: set[str]
    # counts[m-1][context tuple of length m-1][word] -> raw count, m = 1..order
    counts: list[dict]
    # continuation tables for KN, derived from counts on build/load
    _cont: list[dict] = field(default_factory=list, repr=False)
    _cont_totals: list[dict] = field(default_factory=list, repr=False)

    def __post_init__(self):
        if not self._cont:
            self._build_continuation_tables()

    def _build_continuation_tables(self) -> None:
        self._cont = []
        self._cont_totals = []
        for m in range(1, self.order):  # continuation counts for orders 1..order-1
            cont: dict = defaultdict(Counter)
            higher = self.counts[m] if m < len(self.counts) else {}
            for ctx, words in higher.items():
                # ctx has length m; dropping its first token gives the
                # length-(m-1) continuation context.
                short = ctx[1:]
                for w in words:
                    cont[short][w] += 1
            totals = {ctx: sum(c.values()) for ctx, c in cont.items()}
            self._cont.append(dict(cont))
            self._cont_totals.append(totals)

    # -- probability ----------------------------------------------------

    def prob(self, word: str, context: tuple[str, ...]) -> float:
        """p(word | context), context trimmed/padded to order-1 tokens."""
        context = tuple(context)[-(self.order - 1):] if self.order > 1 else ()
        if len(context) < self.order - 1:
            context = (BOS,) * (self.order - 1 - len(context)) + context
        if word not in self.vocab:
            word = UNK
        if self.smoothing == "addk":
            return self._prob_addk(word, context)
        return self._prob_kn(word, context)

    def _prob_addk(self, word: str, context: tuple[str, ...]) -> float:
        table = self.counts[self.order - 1].get(context)
        total = sum(table.values()) if table else 0
        c = table.get(word, 0) if table else 0
        v = len(self.vocab)
        denom = total + self.k * v
        if denom == 0:
            return 1.0 / v
        return (c + self.k) / denom

    def _prob_kn(self, word: str, context: tuple[str, ...]) -> float:
        d = KN_DISCOUNT
        # highest order: raw counts
        table = self.counts[self.order - 1].get(context)
        if table:
            total = sum(table.values())
            c = table.get(word, 0)
            types = len(table)
            lower = self._prob_kn_lower(word, context[1:])
            return max(c - d, 0.0) / total + (d * types / total) * lower
        return self._prob_kn_lower(word, context[1:])

    def _prob_kn_lower(self, word: str, context: tuple[str, ...]) -> float:
        d = KN_DISCOUNT
        m = len(context) + 1  # order of this level
        if m == 1:
            cont = self._cont[0] if self._cont else {}
            table = cont.get((), {})
            total = sum(table.values())
            uniform = 1.0 / len(self.vocab)
            if total == 0:
                return uniform
            cc = table.get(word, 0)
            types = len(table)
            return max(cc - d, 0.0) / total + (d * types / total) * uniform
        table = self._cont[m - 1].get(context)
        total = self._cont_totals[m - 1].get(context, 0)
        lower = self._prob_kn_lower(word, context[1:])
        if not table or total == 0:
            return lower
        cc = table.get(word, 0)
        types = len(table)
        return max(cc - d, 0.0) / total + (d * types / total) * lower

    # -- scoring ---------------------------------------------------------

    def log_prob(self, sentence: list[str]) -> float:
        """Natural-log probability of the sentence plus end-of-sentence."""
        tokens = [t if t in self.vocab else UNK for t in sentence]
        padded = (BOS,) * (self.order - 1) + tuple(tokens) + (EOS,)
        logp = 0.0
        for idx in range(self.order - 1, len(padded)):
            context = padded[idx - (self.order - 1): idx]
            logp += math.log(self.prob(padded[idx], context))
        return logp

    def perplexity(self, sentence: list[str]) -> float:
        n = len(sentence) + 1  # includes end-of-sentence event
        return math.exp(-self.log_prob(sentence) / n)


def train_lm(
    corpus: Iterable[list[str]],
    order: int = 4,
    smoothing: str = "kn",
    k: float = 0.01,
) -> NGramModel:
    """Count n-grams up to ``order`` and return a smoothed model.

    Kneser-Ney falls back to add-k when the corpus is too small for the
    discounting to be well defined (order 1 or no observed bigrams).
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if smoothing not in ("kn", "addk"):
        raise ValueError(f"unknown smoothing {smoothing!r}")
    sentences = [list(s) for s in corpus]
    if not sentences or all(len(s) == 0 for s in sentences):
        raise EmptyCorpusError("cannot train a language model on an empty corpus")

    vocab: set[str] = {EOS, UNK}
    counts: list[dict] = [defaultdict(Counter) for _ in range(order)]
    for sentence in sentences:
        vocab.update(sentence)
        padded = (BOS,) * (order - 1) + tuple(sentence) + (EOS,)
        for idx in range(order - 1, len(padded)):
            word = padded[idx]
            for m in range(1, order + 1):
                context = padded[idx - (m - 1): idx]
                counts[m - 1][context][word] += 1

    counts = [dict(level) for level in counts]
    if smoothing == "kn":
        has_bigrams = order >= 2 and any(counts[1].values())
        if not has_bigrams:
            smoothing = "addk"
    return NGramModel(order=order, smoothing=smoothing, k=k, vocab=vocab, counts=counts)


def perplexity(model: NGramModel, sentence: list[str]) -> float:
    return model.perplexity(sentence)


_CTX_SEP = "\x1f"


def save_model(model: NGramModel, path) -> None:
    body = {
        "order": model.order,
        "smoothing": model.smoothing,
        "k": model.k,
        "vocab": sorted(model.vocab),
        "counts": [
            {_CTX_SEP.join(ctx): dict(words) for ctx, words in level.items()}
            for level in model.counts
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(FORMAT_HEADER + "\n")
        json.dump(body, fh, ensure_ascii=False)


def load_model(path) -> NGramModel:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != FORMAT_HEADER:
            raise ValueError(f"unrecognized LM file header: {header!r}")
        body = json.load(fh)
    counts = [
        {
            tuple(ctx.split(_CTX_SEP)) if ctx else (): Counter(words)
            for ctx, words in level.items()
        }
        for level in body["counts"]
    ]
    return NGramModel(
        order=body["order"],
        smoothing=body["smoothing"],
        k=body["k"],
        vocab=set(body["vocab"]),
        counts=counts,
    )
