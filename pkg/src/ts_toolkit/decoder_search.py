"""Beam-search generation of ranked suggestion hypotheses.

Hypotheses are scored by length-normalized log-probability
(``log_prob / length^alpha``); an immediately emitted end-of-sequence is a
legal hypothesis, which is how the empty suggestion for null spans surfaces.
Ties break toward lower token ids so decoding is fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import torch
import torch.nn.functional as F

from .corpus_io import BOS, EOS, PAD
from .data import EncodedExample, make_batch
from .sa_model import SaTransformer
from .subword import SubwordModel


@dataclass
class Hypothesis:
    tokens: list[int]  # generated ids, end-of-sequence excluded
    log_prob: float
    score: float
    finished: bool
    truncated: bool = False


def _normalized(log_prob: float, n_tokens: int, alpha: float) -> float:
    # length counts the end-of-sequence event, so the empty suggestion has
    # length 1 rather than 0
    return log_prob / (n_tokens + 1) ** alpha


def beam_search(
    model: SaTransformer,
    encoded: EncodedExample,
    subword: SubwordModel,
    beam_size: int = 4,
    max_len: int = 32,
    alpha: float = 0.6,
) -> list[Hypothesis]:
    """Return up to ``beam_size`` finished hypotheses, best score first.

    If nothing finishes within ``max_len`` steps, the best unfinished
    hypothesis is returned with its ``truncated`` flag set.
    """
    if beam_size < 1 or max_len < 1:
        raise ValueError("beam_size and max_len must be >= 1")
    bos_id = subword.vocab[BOS]
    eos_id = subword.vocab[EOS]

    model.eval()
    with torch.no_grad():
        batch = make_batch([encoded], subword)
        memory = model.encode(
            batch["src_tokens"], batch["src_positions"], batch["src_segments"],
            batch["src_pad_mask"],
        )
        src_pad_mask = batch["src_pad_mask"]

        beams: list[tuple[tuple[int, ...], float]] = [((), 0.0)]
        finished: list[Hypothesis] = []
        for _ in range(max_len):
            prefixes = torch.tensor(
                [[bos_id, *tokens] for tokens, _ in beams], dtype=torch.long
            )
            logits = model.decode(
                prefixes,
                memory.expand(len(beams), -1, -1),
                src_pad_mask.expand(len(beams), -1),
            )
            step_logp = F.log_softmax(logits[:, -1], dim=-1)
            candidates: list[tuple[tuple[int, ...], float]] = []
            for b, (tokens, log_prob) in enumerate(beams):
                for tok in range(step_logp.shape[1]):
                    candidates.append(
                        (tokens + (tok,), log_prob + float(step_logp[b, tok]))
                    )
            # best first; ties resolve toward lower token ids
            candidates.sort(key=lambda c: (-c[1], c[0]))
            beams = []
            for tokens, log_prob in candidates:
                if len(beams) + len(finished) >= beam_size:
                    break
                if tokens[-1] == eos_id:
                    gen = list(tokens[:-1])
                    finished.append(
                        Hypothesis(
                            tokens=gen,
                            log_prob=log_prob,
                            score=_normalized(log_prob, len(gen), alpha),
                            finished=True,
                        )
                    )
                else:
                    beams.append((tokens, log_prob))
            if not beams:
                break

        if not finished:
            tokens, log_prob = max(beams, key=lambda c: (c[1], [-t for t in c[0]]))
            return [
                Hypothesis(
                    tokens=list(tokens),
                    log_prob=log_prob,
                    score=_normalized(log_prob, len(tokens), alpha),
                    finished=False,
                    truncated=True,
                )
            ]

    finished.sort(key=lambda h: (-h.score, h.tokens))
    return finished[:beam_size]
