"""HTTP surface: suggestion, introduction generation, health, record lookup.

State (config, corpus, index, provider clients) is immutable after startup,
so concurrent requests share it without locking.
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ..introgen.chain import ChainStageError, RecencyPolicy, run_intro_chain
from ..providers.base import ProviderError
from ..recommend.pipeline import SuggestConfig, SuggestStageError, suggest
from .runtime import Runtime, parse_bib_works, resolve_references


class SuggestRequest(BaseModel):
    document: str
    cursor: int
    bibtex: str = ""
    max_suggestions: Optional[int] = None


class IntroRequest(BaseModel):
    manuscript: str
    abstract: str
    bibtex: str = ""
    title: Optional[str] = None
    y_years: Optional[int] = None
    keep_fraction: Optional[float] = None


def create_app(runtime: Runtime) -> FastAPI:
    app = FastAPI(title="citescribe", version=runtime.version)

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": "malformed_body", "detail": exc.errors()})

    @app.get("/health")
    def health():
        return {
            "version": runtime.version,
            "index_count": runtime.index.count if runtime.index else 0,
        }

    @app.get("/works/{work_id}")
    def get_work(work_id: str):
        work = runtime.works_by_id.get(work_id)
        if work is None:
            return JSONResponse(status_code=404, content={"error": "work_not_found"})
        return work.to_record()

    @app.post("/suggest")
    def post_suggest(body: SuggestRequest):
        if body.cursor < 0 or body.cursor > len(body.document):
            return JSONResponse(
                status_code=400,
                content={"error": "cursor_out_of_range", "cursor": body.cursor},
            )
        if runtime.index is None or runtime.generator is None or runtime.embedder is None:
            return JSONResponse(
                status_code=502,
                content={"error": "provider_unconfigured", "stage": "fabricate"},
            )
        config = runtime.config
        suggest_config = SuggestConfig(
            k=config.k,
            max_suggestions=body.max_suggestions or config.max_suggestions,
            candidate_cap=config.candidate_cap,
            seed=config.seed,
        )
        try:
            batch = suggest(
                body.document,
                body.cursor,
                body.bibtex,
                runtime.index,
                runtime.works_by_id,
                runtime.generator,
                runtime.scorer,
                runtime.embedder,
                runtime.templates,
                suggest_config,
            )
        except SuggestStageError as exc:
            return JSONResponse(
                status_code=502, content={"error": str(exc.cause), "stage": exc.stage}
            )
        payload = batch.to_json_dict()
        payload["timings_ms"] = {k: round(v, 3) for k, v in batch.timings_ms.items()}
        payload["fabrication_failed"] = batch.fabrication_failed
        return payload

    @app.post("/intro")
    def post_intro(body: IntroRequest):
        if not body.abstract.strip():
            return JSONResponse(status_code=400, content={"error": "abstract_required"})
        if runtime.generator is None:
            return JSONResponse(
                status_code=502,
                content={"error": "provider_unconfigured", "stage": "references"},
            )
        bib_works = parse_bib_works(body.bibtex)
        refs, resolution = resolve_references(bib_works, runtime.works_by_id)
        if not refs:
            return JSONResponse(
                status_code=422,
                content={"error": "references_unresolved", "resolution": resolution},
            )
        policy = RecencyPolicy(y_years=body.y_years or runtime.config.y_years)
        try:
            state = run_intro_chain(
                body.manuscript,
                refs,
                policy,
                runtime.generator,
                runtime.templates,
                abstract=body.abstract,
                title=body.title,
                keep_fraction=(
                    body.keep_fraction
                    if body.keep_fraction is not None
                    else runtime.config.keep_fraction
                ),
                embedder=runtime.embedder,
            )
        except ChainStageError as exc:
            status = 422 if exc.stage in ("inputs", "references") else 502
            return JSONResponse(
                status_code=status,
                content={
                    "error": exc.message,
                    "stage": exc.stage,
                    "trace": exc.state.to_json_dict() if exc.state else None,
                },
            )
        except ProviderError as exc:
            return JSONResponse(status_code=502, content={"error": str(exc), "stage": "chain"})
        return {"intro_text": state.intro_text, "trace": state.to_json_dict()}

    if runtime.config.ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=runtime.config.ui_dir, html=True), name="ui")

    return app
