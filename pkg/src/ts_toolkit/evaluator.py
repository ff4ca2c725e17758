"""Multi-reference BLEU-4 (multi-bleu conventions) and test-set evaluation.

Corpus BLEU uses clipped n-gram counting with the clip taken as the maximum
count over the references, closest-reference-length brevity penalty (ties
toward the shorter reference) and no smoothing.  Character-level mode splits
hypothesis and references into single characters before counting.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass

from . import decoder_search, subword as subword_mod
from .corpus_io import TsExample
from .data import encode_example

MAX_ORDER = 4


@dataclass
class BleuReport:
    bleu: float  # percentage in [0, 100]
    precisions: list[float]
    brevity_penalty: float
    hyp_length: int
    ref_length: int

    def to_dict(self) -> dict:
        return {
            "bleu": self.bleu,
            "precisions": self.precisions,
            "brevity_penalty": self.brevity_penalty,
            "hyp_length": self.hyp_length,
            "ref_length": self.ref_length,
        }

    def __str__(self) -> str:
        p = "/".join(f"{x * 100:.1f}" for x in self.precisions)
        return (
            f"BLEU = {self.bleu:.2f}, {p} "
            f"(BP={self.brevity_penalty:.3f}, hyp_len={self.hyp_length}, "
            f"ref_len={self.ref_length})"
        )


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i: i + n]) for i in range(len(tokens) - n + 1))


def _to_chars(tokens: list[str]) -> list[str]:
    return list("".join(tokens))


def _closest_ref_length(hyp_len: int, refs: list[list[str]]) -> int:
    # tie toward the shorter reference
    return min((abs(len(r) - hyp_len), len(r)) for r in refs)[1]


def corpus_bleu(
    hypotheses: list[list[str]],
    reference_sets: list[list[list[str]]],
    mode: str = "word",
) -> BleuReport:
    if len(hypotheses) != len(reference_sets):
        raise ValueError("hypotheses and reference sets differ in length")
    if not hypotheses:
        raise ValueError("empty corpus")
    if mode not in ("word", "char"):
        raise ValueError(f"unknown mode {mode!r}")

    matched = [0] * MAX_ORDER
    total = [0] * MAX_ORDER
    hyp_length = 0
    ref_length = 0
    for hyp, refs in zip(hypotheses, reference_sets):
        if not refs:
            raise ValueError("each segment needs at least one reference")
        if mode == "char":
            hyp = _to_chars(hyp)
            refs = [_to_chars(r) for r in refs]
        hyp_length += len(hyp)
        ref_length += _closest_ref_length(len(hyp), refs)
        for n in range(1, MAX_ORDER + 1):
            hyp_counts = _ngrams(hyp, n)
            if not hyp_counts:
                continue
            max_ref = Counter()
            for ref in refs:
                for gram, count in _ngrams(ref, n).items():
                    if count > max_ref[gram]:
                        max_ref[gram] = count
            matched[n - 1] += sum(min(c, max_ref[g]) for g, c in hyp_counts.items())
            total[n - 1] += sum(hyp_counts.values())

    precisions = [m / t if t > 0 else 0.0 for m, t in zip(matched, total)]
    if hyp_length == 0:
        bp = 0.0
    elif hyp_length >= ref_length:
        bp = 1.0
    else:
        bp = math.exp(1.0 - ref_length / hyp_length)
    # orders with no n-grams anywhere in the corpus (very short segments) are
    # excluded from the geometric mean; a zero precision at an attested order
    # still zeroes the score, as in multi-bleu
    attested = [(m, t) for m, t in zip(matched, total) if t > 0]
    if attested and all(m > 0 for m, _ in attested):
        mean_log_p = sum(math.log(m / t) for m, t in attested) / len(attested)
        bleu = bp * math.exp(mean_log_p) * 100.0
    else:
        bleu = 0.0
    return BleuReport(bleu, precisions, bp, hyp_length, ref_length)


def sentence_bleu_smoothed(
    hypothesis: list[str], references: list[list[str]], mode: str = "word"
) -> float:
    """Add-1-smoothed sentence BLEU, for per-example diagnostics only."""
    if mode == "char":
        hypothesis = _to_chars(hypothesis)
        references = [_to_chars(r) for r in references]
    if not hypothesis:
        return 0.0
    log_p_sum = 0.0
    for n in range(1, MAX_ORDER + 1):
        hyp_counts = _ngrams(hypothesis, n)
        max_ref = Counter()
        for ref in references:
            for gram, count in _ngrams(ref, n).items():
                if count > max_ref[gram]:
                    max_ref[gram] = count
        m = sum(min(c, max_ref[g]) for g, c in hyp_counts.items())
        t = sum(hyp_counts.values())
        log_p_sum += math.log((m + 1.0) / (t + 1.0))
    ref_len = _closest_ref_length(len(hypothesis), references)
    bp = 1.0 if len(hypothesis) >= ref_len else math.exp(1.0 - ref_len / len(hypothesis))
    return bp * math.exp(log_p_sum / MAX_ORDER) * 100.0


@dataclass
class EvalResult:
    report: BleuReport
    exact_match: float
    rows: list[dict]


def evaluate_testset(
    model,
    examples: list[TsExample],
    subword,
    beam_size: int = 4,
    max_len: int = 32,
    alpha: float = 0.6,
    mode: str = "word",
    with_hint: bool = True,
    dump_path=None,
) -> EvalResult:
    """Decode top-1 suggestions and score against all gold alternatives.

    BPE is undone before scoring, so BLEU is computed on de-tokenized words
    (or characters in char mode).
    """
    hypotheses = []
    reference_sets = []
    rows = []
    exact = 0
    for example in examples:
        encoded = encode_example(example, subword, with_hint=with_hint)
        hyps = decoder_search.beam_search(
            model, encoded, subword, beam_size=beam_size, max_len=max_len, alpha=alpha
        )
        top_k = [
            {
                "tokens": subword_mod.undo_bpe(subword_mod.decode(subword, h.tokens)),
                "score": h.score,
            }
            for h in hyps
        ]
        hyp_words = top_k[0]["tokens"]
        refs = [list(alt) for alt in example.alternatives]
        hypotheses.append(hyp_words)
        reference_sets.append(refs)
        if hyp_words in refs:
            exact += 1
        rows.append(
            {
                "input": {
                    "source": example.source,
                    "translation": example.translation,
                    "span": [example.span_start, example.span_end],
                    "hint": example.hint,
                },
                "top_k": top_k,
                "gold": refs,
                "sentence_bleu": sentence_bleu_smoothed(hyp_words, refs, mode),
            }
        )
    report = corpus_bleu(hypotheses, reference_sets, mode=mode)
    if dump_path is not None:
        with open(dump_path, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row, ensure_ascii=False))
                fh.write("\n")
    return EvalResult(report=report, exact_match=exact / len(examples), rows=rows)
