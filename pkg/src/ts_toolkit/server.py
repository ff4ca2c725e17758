"""HTTP suggestion service for the post-editing workbench.

POST /suggest takes a source sentence, a translation with a word-level span
(zero-width spans ask for insertions) and an optional hint, and returns the
top-k beam-search suggestions.  GET /health reports readiness.  Static
workbench assets, when present, are served under /ui.
"""

from __future__ import annotations

import time
from pathlib import Path

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import decoder_search, subword as subword_mod
from .corpus_io import TsExample
from .data import encode_example

DEFAULT_PORT = 8077


class SuggestRequest(BaseModel):
    source: str
    translation: str
    span: tuple[int, int]
    hint: str | None = None
    k: int = Field(default=3, ge=1)


def _tokenize(text: str) -> list[str]:
    return text.split()


def create_app(
    model,
    subword,
    model_id: str = "sa-transformer",
    beam_size: int = 4,
    max_len: int = 32,
    alpha: float = 0.6,
    ui_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="translation-suggestion server")
    app.state.model = model
    app.state.subword = subword
    app.state.model_id = model_id

    @app.get("/health")
    def health():
        if app.state.model is None:
            return JSONResponse(
                status_code=503, content={"status": "model-not-loaded"}
            )
        return {"status": "ok", "model_id": app.state.model_id}

    @app.post("/suggest")
    def suggest(request: SuggestRequest):
        if app.state.model is None:
            return JSONResponse(
                status_code=503,
                content={"error": "model-not-loaded"},
            )
        started = time.perf_counter()
        translation = _tokenize(request.translation)
        i, j = request.span
        if not (0 <= i <= j <= len(translation)):
            return JSONResponse(
                status_code=400,
                content={
                    "error": "invalid-span",
                    "detail": f"span [{i}, {j}) out of bounds for translation "
                    f"of {len(translation)} tokens",
                },
            )
        k = min(request.k, beam_size)
        hint = list(request.hint.replace(" ", "")) if request.hint else None
        example = TsExample(
            source=_tokenize(request.source),
            translation=translation,
            span_start=i,
            span_end=j,
            alternatives=[[]],  # rendering only; gold alternatives unknown
            hint=hint,
        )
        encoded = encode_example(
            example, app.state.subword, with_hint=hint is not None
        )
        hyps = decoder_search.beam_search(
            app.state.model,
            encoded,
            app.state.subword,
            beam_size=beam_size,
            max_len=max_len,
            alpha=alpha,
        )
        suggestions = []
        for h in hyps[:k]:
            words = subword_mod.undo_bpe(
                subword_mod.decode(app.state.subword, h.tokens)
            )
            suggestions.append(
                {"tokens": words, "text": " ".join(words), "score": h.score}
            )
        latency_ms = (time.perf_counter() - started) * 1000.0
        return {
            "suggestions": suggestions,
            "model_id": app.state.model_id,
            "latency_ms": latency_ms,
        }

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
