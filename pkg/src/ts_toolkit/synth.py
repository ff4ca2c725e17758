"""Synthetic translation-suggestion corpus construction.

Three methods: sampling spans on the golden parallel corpus, sampling on
pseudo (machine-translated) pairs, and alignment-based extraction where an
aligned reference phrase replaces a translation phrase only if it differs
from it and lowers LM perplexity by at least the configured margin.
Training-time hints (word initials of the alternative) are attached to a
configurable fraction of examples.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable

from . import aligner as aligner_mod
from .corpus_io import TsExample
from .ngram_lm import NGramModel


class HintExtractorError(ValueError):
    """Raised when the default hint extractor meets a non-Latin script."""


class MissingTranslationError(ValueError):
    def __init__(self, line_number: int):
        super().__init__(f"missing translation for source line {line_number}")
        self.line_number = line_number


@dataclass
class SamplerConfig:
    max_span_len: int = 6
    p_null: float = 0.1
    samples_per_sentence: int = 2
    seed: int = 0
    beta: float = 10.0
    p_hint: float = 0.0

    def __post_init__(self):
        if self.max_span_len < 1:
            raise ValueError("max_span_len must be >= 1")
        if not (0.0 <= self.p_null < 1.0):
            raise ValueError("p_null must be in [0, 1)")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")


@dataclass
class SynthStats:
    emitted: int = 0
    skipped_short: int = 0
    rejected_identity: int = 0
    rejected_margin: int = 0

    def to_dict(self) -> dict:
        return {
            "emitted": self.emitted,
            "skipped_short": self.skipped_short,
            "rejected_identity": self.rejected_identity,
            "rejected_margin": self.rejected_margin,
        }


LATIN_MAX_CODEPOINT = 0x024F  # Basic Latin through Latin Extended-B


def default_hint_extractor(alternative: list[str]) -> list[str]:
    hint = []
    for word in alternative:
        first = word[0]
        if ord(first) > LATIN_MAX_CODEPOINT:
            raise HintExtractorError(
                "extractor-not-configured: default hint extractor handles Latin "
                "scripts only; supply a phonetic-initials extractor"
            )
        hint.append(first)
    return hint


def generate_hint(
    alternative: list[str],
    extractor: Callable[[list[str]], list[str]] | None = None,
) -> list[str]:
    """Hint for an alternative: one initial per word (pluggable extractor)."""
    if not alternative:
        return []
    extractor = extractor or default_hint_extractor
    return extractor(alternative)


def _sample_pairs(
    pairs: Iterable[tuple[list[str], list[str]]],
    cfg: SamplerConfig,
    method: str,
    stats: SynthStats,
    hint_extractor=None,
) -> list[TsExample]:
    rng = random.Random(cfg.seed)
    out = []
    for src, tgt in pairs:
        if len(tgt) < 1:
            stats.skipped_short += 1
            continue
        for _ in range(cfg.samples_per_sentence):
            if rng.random() < cfg.p_null:
                i = rng.randint(0, len(tgt))
                j = i
            else:
                length = rng.randint(1, min(cfg.max_span_len, len(tgt)))
                i = rng.randint(0, len(tgt) - length)
                j = i + length
            alt = tgt[i:j]
            hint = None
            if alt and cfg.p_hint > 0 and rng.random() < cfg.p_hint:
                hint = generate_hint(alt, hint_extractor)
            out.append(
                TsExample(
                    source=list(src),
                    translation=list(tgt),
                    span_start=i,
                    span_end=j,
                    alternatives=[alt],
                    hint=hint,
                    method=method,
                )
            )
            stats.emitted += 1
    return out


def sample_golden(
    pairs: Iterable[tuple[list[str], list[str]]],
    cfg: SamplerConfig,
    hint_extractor=None,
) -> tuple[list[TsExample], SynthStats]:
    """Mask random spans of the reference target; the removed span is the gold
    alternative, so splicing it back reconstructs the reference exactly."""
    stats = SynthStats()
    return _sample_pairs(pairs, cfg, "golden", stats, hint_extractor), stats


def sample_pseudo(
    sources: list[list[str]],
    cfg: SamplerConfig,
    translator: Callable[[list[str]], list[str]] | None = None,
    translations: list[list[str]] | None = None,
    hint_extractor=None,
) -> tuple[list[TsExample], SynthStats]:
    """Same sampling over (source, machine translation) pairs.

    Translations come from a translator callable or a pre-translated list
    aligned line-for-line with the sources.
    """
    if translator is None and translations is None:
        raise ValueError("either translator or translations must be supplied")
    pairs = []
    for idx, src in enumerate(sources):
        if translations is not None:
            if idx >= len(translations) or translations[idx] is None:
                raise MissingTranslationError(idx + 1)
            mt = translations[idx]
        else:
            mt = translator(src)
        pairs.append((src, mt))
    stats = SynthStats()
    return _sample_pairs(pairs, cfg, "pseudo", stats, hint_extractor), stats


def extract_alignment_based(
    triples: Iterable[tuple[list[str], list[str], list[str]]],
    fwd_model: aligner_mod.AlignmentModel,
    rev_model: aligner_mod.AlignmentModel,
    lm: NGramModel,
    cfg: SamplerConfig,
    hint_extractor=None,
) -> tuple[list[TsExample], SynthStats]:
    """Alignment-based extraction over (source, translation, reference) triples.

    For every consistent phrase pair between the translation and the
    reference, the reference phrase is accepted as an alternative iff it is
    not identical to the translation phrase and splicing it in lowers the
    translation's perplexity by at least ``cfg.beta``.  Overlapping phrase
    pairs are emitted independently.
    """
    rng = random.Random(cfg.seed)
    stats = SynthStats()
    out = []
    for src, mt, ref in triples:
        if not mt or not ref:
            stats.skipped_short += 1
            continue
        fwd = aligner_mod.viterbi_align(fwd_model, mt, ref)
        rev = {
            (i, j)
            for j, i in aligner_mod.viterbi_align(rev_model, ref, mt)
        }
        links = aligner_mod.symmetrize(fwd, rev, len(mt), len(ref))
        base_ppl = lm.perplexity(mt)
        for pp in aligner_mod.extract_phrases(links, len(mt), len(ref), cfg.max_span_len):
            alt = ref[pp.tgt_start: pp.tgt_end]
            original = mt[pp.src_start: pp.src_end]
            if alt == original:
                stats.rejected_identity += 1
                continue
            spliced = mt[: pp.src_start] + alt + mt[pp.src_end:]
            if lm.perplexity(spliced) > base_ppl - cfg.beta:
                stats.rejected_margin += 1
                continue
            hint = None
            if alt and cfg.p_hint > 0 and rng.random() < cfg.p_hint:
                hint = generate_hint(alt, hint_extractor)
            out.append(
                TsExample(
                    source=list(src),
                    translation=list(mt),
                    span_start=pp.src_start,
                    span_end=pp.src_end,
                    alternatives=[alt],
                    hint=hint,
                    method="align",
                )
            )
            stats.emitted += 1
    return out, stats


def write_stats(stats: SynthStats, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(stats.to_dict(), fh, indent=2)
        fh.write("\n")
