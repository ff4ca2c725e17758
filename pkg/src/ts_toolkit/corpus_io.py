"""Translation-suggestion example data model, span masking, input rendering
and the line-delimited JSON on-disk format.

A TS example pairs a source sentence with a machine translation in which one
span ``[span_start, span_end)`` is marked incorrect.  A zero-width span
(``span_start == span_end``) asks whether words should be inserted at that
position.  Each example carries one or more gold alternatives for the span.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

logger = logging.getLogger(__name__)

PAD = "<pad>"
UNK = "<unk>"
BOS = "<bos>"
EOS = "<eos>"
SEP = "<sep>"
PLACEHOLDER = "<slot>"

#: Reserved symbols, in vocabulary-id order (lowest ids).
RESERVED = (PAD, UNK, BOS, EOS, SEP, PLACEHOLDER)

SEG_SOURCE = 0
SEG_TRANSLATION = 1
SEG_HINT = 2


class SpanBoundsError(ValueError):
    """Span indices fall outside the translation."""


class RecordError(ValueError):
    """A TS record file line is malformed or violates example invariants."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


@dataclass
class TsExample:
    source: list[str]
    translation: list[str]
    span_start: int
    span_end: int
    alternatives: list[list[str]]
    hint: list[str] | None = None
    method: str | None = None  # provenance of synthetic examples, optional

    def validate(self) -> None:
        if not (0 <= self.span_start <= self.span_end <= len(self.translation)):
            raise SpanBoundsError(
                f"span [{self.span_start}, {self.span_end}) out of bounds for "
                f"translation of length {len(self.translation)}"
            )
        if not self.alternatives:
            raise RecordError("alternatives must be non-empty")
        is_null = self.span_start == self.span_end
        for alt in self.alternatives:
            if not alt and not is_null:
                raise RecordError("empty alternative is only valid for a null span")
            for tok in alt:
                if tok in RESERVED:
                    raise RecordError(f"reserved symbol {tok!r} inside alternative")
        for tok in self.source + self.translation:
            if tok in RESERVED:
                raise RecordError(f"reserved symbol {tok!r} inside user text")
        if self.hint is not None:
            for tok in self.hint:
                if tok in RESERVED:
                    raise RecordError(f"reserved symbol {tok!r} inside hint")

    @property
    def is_null_span(self) -> bool:
        return self.span_start == self.span_end


@dataclass
class RenderedInput:
    """Model input: concatenated segments with segment/position ids.

    Positions restart at 0 within each segment; segment ids are
    non-decreasing and exactly one placeholder appears, in segment 1.
    """

    tokens: list[str]
    segment_ids: list[int]
    position_ids: list[int]
    target: list[str] | None = None


def mask_span(translation: list[str], i: int, j: int) -> tuple[list[str], list[str]]:
    """Replace ``translation[i:j]`` with the placeholder.

    Returns ``(masked, removed)``.  Splicing ``removed`` back at the
    placeholder recovers the original translation exactly (``i == j`` gives
    the null/insertion case with ``removed == []``).
    """
    if not (0 <= i <= j <= len(translation)):
        raise SpanBoundsError(
            f"span [{i}, {j}) out of bounds for length {len(translation)}"
        )
    masked = translation[:i] + [PLACEHOLDER] + translation[j:]
    removed = translation[i:j]
    return masked, removed


def unmask(masked: list[str], removed: list[str]) -> list[str]:
    """Inverse of :func:`mask_span`: splice ``removed`` at the placeholder."""
    k = masked.index(PLACEHOLDER)
    return masked[:k] + removed + masked[k + 1 :]


def render_input(
    example: TsExample,
    with_hint: bool = False,
    target: list[str] | None = None,
) -> RenderedInput:
    """Render one example as the model input sequence.

    Layout: ``source <sep> masked-translation [<sep> hint]``.  The first
    separator takes segment id 0 and the second segment id 1 (separators
    belong to the preceding segment).
    """
    masked, _removed = mask_span(example.translation, example.span_start, example.span_end)
    tokens = list(example.source) + [SEP]
    segment_ids = [SEG_SOURCE] * len(tokens)
    tokens += masked
    segment_ids += [SEG_TRANSLATION] * len(masked)
    if with_hint:
        if example.hint is None:
            logger.debug("hint requested but absent; rendering without hint segment")
        else:
            tokens += [SEP] + list(example.hint)
            segment_ids += [SEG_TRANSLATION] + [SEG_HINT] * len(example.hint)
    position_ids = []
    pos = 0
    for k, seg in enumerate(segment_ids):
        if k > 0 and seg != segment_ids[k - 1]:
            pos = 0
        position_ids.append(pos)
        pos += 1
    return RenderedInput(tokens, segment_ids, position_ids, target=target)


def _to_record(example: TsExample) -> dict:
    record = {
        "source": example.source,
        "translation": example.translation,
        "span": [example.span_start, example.span_end],
        "alternatives": example.alternatives,
        "hint": example.hint,
    }
    if example.method is not None:
        record["method"] = example.method
    return record


def _from_record(record: dict, line_number: int | None = None) -> TsExample:
    try:
        span = record["span"]
        example = TsExample(
            source=list(record["source"]),
            translation=list(record["translation"]),
            span_start=int(span[0]),
            span_end=int(span[1]),
            alternatives=[list(a) for a in record["alternatives"]],
            hint=list(record["hint"]) if record.get("hint") is not None else None,
            method=record.get("method"),
        )
    except (KeyError, IndexError, TypeError) as exc:
        raise RecordError(f"missing or malformed field: {exc}", line_number)
    try:
        example.validate()
    except ValueError as exc:
        raise RecordError(str(exc), line_number)
    return example


def read_ts_file(path) -> list[TsExample]:
    examples = []
    with open(path, encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordError(f"invalid JSON: {exc}", line_number)
            examples.append(_from_record(record, line_number))
    return examples


def write_ts_file(examples, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for example in examples:
            fh.write(json.dumps(_to_record(example), ensure_ascii=False))
            fh.write("\n")


def apply_subword(example: TsExample, subword_model) -> TsExample:
    """Re-tokenize a word-level example at the subword level.

    The span was selected over words; BPE is applied independently to the
    source, the translation around the span, and each alternative, and the
    span indices are recomputed in subword units.
    """
    from . import subword

    prefix = subword.apply_bpe(subword_model, example.translation[: example.span_start])
    inside = subword.apply_bpe(
        subword_model, example.translation[example.span_start : example.span_end]
    )
    suffix = subword.apply_bpe(subword_model, example.translation[example.span_end :])
    return TsExample(
        source=subword.apply_bpe(subword_model, example.source),
        translation=prefix + inside + suffix,
        span_start=len(prefix),
        span_end=len(prefix) + len(inside),
        alternatives=[subword.apply_bpe(subword_model, alt) for alt in example.alternatives],
        hint=example.hint,
        method=example.method,
    )
