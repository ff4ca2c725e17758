import math
import random

import pytest

from ts_toolkit import aligner, ngram_lm, synth
from ts_toolkit.corpus_io import unmask, mask_span, write_ts_file
from ts_toolkit.synth import (
    HintExtractorError,
    MissingTranslationError,
    SamplerConfig,
    extract_alignment_based,
    generate_hint,
    sample_golden,
    sample_pseudo,
)


def random_pairs(n, seed=0, min_len=1, max_len=12):
    rng = random.Random(seed)
    pairs = []
    for _ in range(n):
        length = rng.randint(min_len, max_len)
        src = [f"s{rng.randint(0, 30)}" for _ in range(length)]
        tgt = [f"t{rng.randint(0, 30)}" for _ in range(length)]
        pairs.append((src, tgt))
    return pairs


class TestSampleGolden:
    def test_reconstruction_identity(self):
        pairs = random_pairs(200, seed=1)
        examples, stats = sample_golden(pairs, SamplerConfig(seed=5))
        assert stats.emitted == len(examples) == 400
        by_ref = {tuple(t): t for _, t in pairs}
        for ex in examples:
            masked, removed = mask_span(ex.translation, ex.span_start, ex.span_end)
            assert removed == ex.alternatives[0]
            assert unmask(masked, ex.alternatives[0]) == by_ref[tuple(ex.translation)]

    def test_forced_spans_are_definitional(self):
        # the sampler only chooses (i, j); given the span the example is fixed
        examples, _ = sample_golden(
            [(["x"], ["a", "b", "c"])],
            SamplerConfig(max_span_len=1, p_null=0.0, samples_per_sentence=1, seed=3),
        )
        ex = examples[0]
        assert ex.alternatives == [ex.translation[ex.span_start: ex.span_end]]
        assert len(ex.alternatives[0]) == 1

    def test_null_span_gives_empty_alternative(self):
        examples, _ = sample_golden(
            [(["x"], ["a", "b"])],
            SamplerConfig(p_null=0.999999, samples_per_sentence=1, seed=0),
        )
        ex = examples[0]
        assert ex.span_start == ex.span_end
        assert ex.alternatives == [[]]

    def test_samples_per_sentence_scales_output(self):
        pairs = random_pairs(50)
        for k in (1, 2, 3):
            examples, _ = sample_golden(pairs, SamplerConfig(samples_per_sentence=k))
            assert len(examples) == 50 * k

    def test_short_sentences_skipped_with_counter(self):
        examples, stats = sample_golden(
            [(["x"], []), (["y"], ["a"])], SamplerConfig(samples_per_sentence=1)
        )
        assert stats.skipped_short == 1
        assert len(examples) == 1

    def test_fixed_seed_byte_identical(self, tmp_path):
        pairs = random_pairs(100, seed=2)
        cfg = SamplerConfig(seed=11, p_hint=0.5)
        for name in ("a.jsonl", "b.jsonl"):
            examples, _ = sample_golden(pairs, cfg)
            write_ts_file(examples, tmp_path / name)
        assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()

    def test_span_length_distribution(self):
        pairs = random_pairs(6000, seed=4, min_len=8, max_len=12)
        cfg = SamplerConfig(max_span_len=4, p_null=0.1, samples_per_sentence=2, seed=9)
        examples, _ = sample_golden(pairs, cfg)
        assert len(examples) >= 10000
        lengths = [ex.span_end - ex.span_start for ex in examples]
        assert all(0 <= l <= 4 for l in lengths)
        assert all(l >= 1 for l in lengths if l != 0)
        null_fraction = sum(1 for l in lengths if l == 0) / len(lengths)
        n = len(lengths)
        sigma = math.sqrt(0.1 * 0.9 / n)
        assert abs(null_fraction - 0.1) <= 3 * sigma


class TestSamplePseudo:
    def test_pass_through_translations(self):
        sources = [["a", "b"], ["c"]]
        translations = [["x", "y"], ["z"]]
        examples, _ = sample_pseudo(
            sources, SamplerConfig(samples_per_sentence=1), translations=translations
        )
        assert all(ex.method == "pseudo" for ex in examples)

    def test_identity_translator_matches_golden(self):
        sources = [s for s, _ in random_pairs(50, seed=6)]
        cfg = SamplerConfig(seed=21)
        golden, _ = sample_golden([(s, s) for s in sources], cfg)
        pseudo, _ = sample_pseudo(sources, cfg, translator=lambda s: list(s))
        for g, p in zip(golden, pseudo):
            assert (g.translation, g.span_start, g.span_end, g.alternatives) == (
                p.translation, p.span_start, p.span_end, p.alternatives
            )

    def test_missing_translation_errors_with_line(self):
        with pytest.raises(MissingTranslationError) as err:
            sample_pseudo([["a"], ["b"]], SamplerConfig(), translations=[["x"]])
        assert err.value.line_number == 2

    def test_requires_some_translation_source(self):
        with pytest.raises(ValueError):
            sample_pseudo([["a"]], SamplerConfig())


class TestAlignmentBased:
    def build_models(self, bitext):
        fwd = aligner.em_train(bitext, 5)
        rev = aligner.em_train([(t, s) for s, t in bitext], 5)
        return fwd, rev

    def crafted_setup(self):
        mt = ["the", "cat", "sat"]
        ref = ["the", "dog", "sat"]
        bitext = [(mt, ref), (["the"], ["the"]), (["sat"], ["sat"]), (["cat"], ["dog"])]
        fwd, rev = self.build_models(bitext)
        # LM strongly prefers the reference wording
        lm = ngram_lm.train_lm([ref] * 50, order=2, smoothing="addk", k=0.001)
        return mt, ref, fwd, rev, lm

    def test_crafted_single_extraction(self):
        mt, ref, fwd, rev, lm = self.crafted_setup()
        margin = lm.perplexity(mt) - lm.perplexity(ref)
        assert margin > 10
        cfg = SamplerConfig(max_span_len=1, beta=10.0, samples_per_sentence=1)
        examples, stats = extract_alignment_based(
            [(["src"], mt, ref)], fwd, rev, lm, cfg
        )
        assert len(examples) == 1
        ex = examples[0]
        assert (ex.span_start, ex.span_end) == (1, 2)
        assert ex.alternatives == [["dog"]]
        assert stats.rejected_identity >= 2

    def test_identical_translation_yields_nothing(self):
        mt = ["the", "cat", "sat"]
        bitext = [(mt, mt), (["the"], ["the"])]
        fwd, rev = self.build_models(bitext)
        lm = ngram_lm.train_lm([mt], order=2, smoothing="addk")
        examples, stats = extract_alignment_based(
            [(["s"], mt, list(mt))], fwd, rev, lm, SamplerConfig(beta=0.0)
        )
        assert examples == []
        assert stats.rejected_identity > 0

    def test_unreachable_margin_yields_nothing(self):
        mt, ref, fwd, rev, lm = self.crafted_setup()
        cfg = SamplerConfig(max_span_len=1, beta=math.inf)
        examples, _ = extract_alignment_based([(["s"], mt, ref)], fwd, rev, lm, cfg)
        assert examples == []

    def test_emitted_examples_recheck_margin(self):
        mt, ref, fwd, rev, lm = self.crafted_setup()
        cfg = SamplerConfig(max_span_len=3, beta=10.0)
        examples, _ = extract_alignment_based([(["s"], mt, ref)], fwd, rev, lm, cfg)
        assert examples
        for ex in examples:
            alt = ex.alternatives[0]
            spliced = ex.translation[: ex.span_start] + alt + ex.translation[ex.span_end:]
            assert alt != ex.translation[ex.span_start: ex.span_end]
            assert lm.perplexity(spliced) <= lm.perplexity(ex.translation) - cfg.beta


class TestGenerateHint:
    def test_first_letter_rule(self):
        assert generate_hint(["getting", "popular"]) == ["g", "p"]

    def test_single_token(self):
        assert generate_hint(["fire"]) == ["f"]

    def test_empty_alternative(self):
        assert generate_hint([]) == []

    def test_non_latin_requires_configured_extractor(self):
        with pytest.raises(HintExtractorError, match="extractor-not-configured"):
            generate_hint(["火了"])

    def test_pluggable_extractor(self):
        pinyin = {"火了": ["h", "l"]}
        extractor = lambda alt: [c for w in alt for c in pinyin[w]]
        assert generate_hint(["火了"], extractor) == ["h", "l"]
