"""Deterministic digit-language benchmark used by the test suite and CI.

The toy task: source sentences are digit strings, the target is the
word-for-word spelled-out mapping ("3" -> "three").  Pretraining pairs draw
only from digits 0-7 while the golden split uses all ten digits, so
fine-tuning on golden data measurably improves over pretraining alone.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from . import synth
from .corpus_io import TsExample, write_ts_file

SRC_WORDS = [str(d) for d in range(10)]
TGT_WORDS = [
    "zero", "one", "two", "three", "four",
    "five", "six", "seven", "eight", "nine",
]
WORD_MAP = dict(zip(SRC_WORDS, TGT_WORDS))


def translate(source: list[str]) -> list[str]:
    """The toy language's exact word-for-word translation."""
    return [WORD_MAP[w] for w in source]


def generate_pairs(
    n: int,
    rng: random.Random,
    digits: range = range(8),
    min_len: int = 3,
    max_len: int = 8,
) -> list[tuple[list[str], list[str]]]:
    pairs = []
    choices = [SRC_WORDS[d] for d in digits]
    for _ in range(n):
        length = rng.randint(min_len, max_len)
        src = [rng.choice(choices) for _ in range(length)]
        pairs.append((src, translate(src)))
    return pairs


def make_golden_examples(
    n: int,
    rng: random.Random,
    p_hint: float = 0.0,
    max_span_len: int = 3,
    p_null: float = 0.1,
) -> list[TsExample]:
    pairs = generate_pairs(n, rng, digits=range(10))
    cfg = synth.SamplerConfig(
        max_span_len=max_span_len,
        p_null=p_null,
        samples_per_sentence=1,
        seed=rng.randrange(2**31),
        p_hint=p_hint,
    )
    examples, _stats = synth.sample_golden(pairs, cfg)
    for ex in examples:
        ex.method = "toy-golden"
    return examples


def make_toy(
    out_dir,
    n_pairs: int = 10000,
    n_golden_train: int = 500,
    n_golden_test: int = 500,
    seed: int = 0,
    p_hint: float = 0.0,
) -> dict:
    """Write the toy benchmark to ``out_dir``; returns the manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)

    pairs = generate_pairs(n_pairs, rng, digits=range(8))
    with open(out_dir / "pretrain.src", "w", encoding="utf-8") as fs, open(
        out_dir / "pretrain.tgt", "w", encoding="utf-8"
    ) as ft:
        for src, tgt in pairs:
            fs.write(" ".join(src) + "\n")
            ft.write(" ".join(tgt) + "\n")

    golden_train = make_golden_examples(n_golden_train, rng, p_hint=p_hint)
    golden_test = make_golden_examples(n_golden_test, rng, p_hint=p_hint)
    write_ts_file(golden_train, out_dir / "golden_train.jsonl")
    write_ts_file(golden_test, out_dir / "golden_test.jsonl")

    manifest = {
        "seed": seed,
        "n_pairs": n_pairs,
        "n_golden_train": n_golden_train,
        "n_golden_test": n_golden_test,
        "p_hint": p_hint,
        "files": {
            "pretrain_src": "pretrain.src",
            "pretrain_tgt": "pretrain.tgt",
            "golden_train": "golden_train.jsonl",
            "golden_test": "golden_test.jsonl",
        },
    }
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest
