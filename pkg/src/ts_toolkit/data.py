"""Encoding TS examples into model tensors and batching."""

from __future__ import annotations

from dataclasses import dataclass

import torch

from . import corpus_io, subword as subword_mod
from .corpus_io import BOS, EOS, PAD, TsExample
from .subword import SubwordModel


@dataclass
class EncodedExample:
    src_ids: list[int]
    positions: list[int]
    segments: list[int]
    tgt_ids: list[int]  # alternative subword ids, without BOS/EOS


def encode_example(
    example: TsExample,
    subword: SubwordModel,
    alt_index: int = 0,
    with_hint: bool = True,
) -> EncodedExample:
    """Word-level example -> subword-level tensors for one alternative."""
    sub = corpus_io.apply_subword(example, subword)
    rendered = corpus_io.render_input(sub, with_hint=with_hint)
    tgt_tokens = sub.alternatives[alt_index]
    return EncodedExample(
        src_ids=subword_mod.encode(subword, rendered.tokens),
        positions=rendered.position_ids,
        segments=rendered.segment_ids,
        tgt_ids=subword_mod.encode(subword, tgt_tokens),
    )


def encode_training_instances(
    examples: list[TsExample],
    subword: SubwordModel,
    with_hint: bool = True,
) -> list[EncodedExample]:
    """One training instance per (example, alternative) pair."""
    out = []
    for example in examples:
        for alt_index in range(len(example.alternatives)):
            out.append(encode_example(example, subword, alt_index, with_hint))
    return out


def make_batch(
    instances: list[EncodedExample],
    subword: SubwordModel,
    device=None,
    dtype=torch.float32,
) -> dict:
    pad_id = subword.vocab[PAD]
    bos_id = subword.vocab[BOS]
    eos_id = subword.vocab[EOS]
    bsz = len(instances)
    src_len = max(len(e.src_ids) for e in instances)
    tgt_len = max(len(e.tgt_ids) for e in instances) + 1  # room for BOS/EOS

    src_tokens = torch.full((bsz, src_len), pad_id, dtype=torch.long)
    src_positions = torch.zeros((bsz, src_len), dtype=torch.long)
    src_segments = torch.zeros((bsz, src_len), dtype=torch.long)
    src_pad_mask = torch.ones((bsz, src_len), dtype=torch.bool)
    tgt_in = torch.full((bsz, tgt_len), pad_id, dtype=torch.long)
    tgt_out = torch.full((bsz, tgt_len), pad_id, dtype=torch.long)
    tgt_pad_mask = torch.ones((bsz, tgt_len), dtype=torch.bool)

    for b, e in enumerate(instances):
        n = len(e.src_ids)
        src_tokens[b, :n] = torch.tensor(e.src_ids, dtype=torch.long)
        src_positions[b, :n] = torch.tensor(e.positions, dtype=torch.long)
        src_segments[b, :n] = torch.tensor(e.segments, dtype=torch.long)
        src_pad_mask[b, :n] = False
        t = len(e.tgt_ids)
        tgt_in[b, 0] = bos_id
        if t:
            tgt_in[b, 1: t + 1] = torch.tensor(e.tgt_ids, dtype=torch.long)
            tgt_out[b, :t] = torch.tensor(e.tgt_ids, dtype=torch.long)
        tgt_out[b, t] = eos_id
        tgt_pad_mask[b, : t + 1] = False

    batch = {
        "src_tokens": src_tokens,
        "src_positions": src_positions,
        "src_segments": src_segments,
        "src_pad_mask": src_pad_mask,
        "tgt_in": tgt_in,
        "tgt_out": tgt_out,
        "tgt_pad_mask": tgt_pad_mask,
    }
    if device is not None:
        batch = {k: v.to(device) for k, v in batch.items()}
    return batch


def batch_by_tokens(
    instances: list[EncodedExample], batch_tokens: int
) -> list[list[EncodedExample]]:
    """Greedy batching by (source + target) token budget, at least one each."""
    batches: list[list[EncodedExample]] = []
    current: list[EncodedExample] = []
    used = 0
    for inst in instances:
        size = len(inst.src_ids) + len(inst.tgt_ids) + 2
        if current and used + size > batch_tokens:
            batches.append(current)
            current = []
            used = 0
        current.append(inst)
        used += size
    if current:
        batches.append(current)
    return batches
