"""HTTP scoring service: ``POST /score`` with the scored-text wire schema.

Returns 400 on schema violations, 503 while the model is loading.  One model
instance serves all requests; scoring is serialized behind a lock.
"""
from __future__ import annotations

import threading

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .scoring import Scorer, TargetTooLongError


class ScorerHolder:
    """Mutable holder so the app can start before the model finishes loading."""

    def __init__(self, scorer: Scorer | None = None):
        self.scorer = scorer
        self.lock = threading.Lock()


def make_app(holder: ScorerHolder) -> FastAPI:
    app = FastAPI(title="logprob-extractor")

    def bad_request(message: str) -> JSONResponse:
        return JSONResponse(status_code=400, content={"error": message})

    @app.post("/score")
    async def score(request: Request):
        if holder.scorer is None:
            return JSONResponse(status_code=503, content={"error": "model is loading"})
        try:
            payload = await request.json()
        except Exception:
            return bad_request("body is not valid JSON")
        if not isinstance(payload, dict):
            return bad_request("body must be a JSON object")
        model_id = payload.get("model_id")
        text = payload.get("text")
        if not isinstance(model_id, str) or not model_id:
            return bad_request("model_id must be a non-empty string")
        if not isinstance(text, str) or not text:
            return bad_request("text must be a non-empty string")
        if model_id != holder.scorer.model_id:
            return bad_request(f"unknown model_id {model_id!r}; serving {holder.scorer.model_id!r}")
        context_sentences = payload.get("context_sentences", 0)
        context_char_len = payload.get("context_char_len", 0)
        if not isinstance(context_sentences, int) or context_sentences < 0:
            return bad_request("context_sentences must be a non-negative integer")
        if not isinstance(context_char_len, int) or context_char_len < 0:
            return bad_request("context_char_len must be a non-negative integer")
        if context_char_len > len(text.encode("utf-8")):
            return bad_request("context_char_len exceeds the text length")
        try:
            with holder.lock:
                result = holder.scorer.score(text, context_sentences, context_char_len)
        except TargetTooLongError as exc:
            return bad_request(str(exc))
        return JSONResponse(status_code=200, content=result)

    @app.get("/health")
    async def health():
        status = "ready" if holder.scorer is not None else "loading"
        return {"status": status}

    return app


def serve(scorer: Scorer, host: str = "127.0.0.1", port: int = 8808) -> None:
    import uvicorn

    app = make_app(ScorerHolder(scorer))
    uvicorn.run(app, host=host, port=port, log_level="warning")
