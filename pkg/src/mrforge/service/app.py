"""FastAPI application exposing the corpus pipeline and evaluation suite."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import ToolkitError
from . import ops
from .schemas import (
    BuildRequest,
    BuildResponse,
    EvalRequest,
    EvalResponse,
    OverlapRequest,
    OverlapResponse,
    SplitRequest,
    SplitResponse,
    StatsRequest,
    StatsResponse,
    TemplatesRequest,
    TemplatesResponse,
)

STATUS_BY_CATEGORY = {"io": 404, "format": 422, "config": 422}


def create_app() -> FastAPI:
    app = FastAPI(title="mrforge", version=__version__)

    @app.exception_handler(ToolkitError)
    async def toolkit_error_handler(_request: Request, exc: ToolkitError):
        return JSONResponse(
            status_code=STATUS_BY_CATEGORY.get(exc.category, 400),
            content={"error": {"category": exc.category, "message": str(exc)}},
        )

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/build", response_model=BuildResponse)
    def build(req: BuildRequest) -> BuildResponse:
        return ops.run_build(req)

    @app.post("/split", response_model=SplitResponse)
    def split(req: SplitRequest) -> SplitResponse:
        return ops.run_split(req)

    @app.post("/overlap", response_model=OverlapResponse)
    def overlap(req: OverlapRequest) -> OverlapResponse:
        return ops.run_overlap(req)

    @app.post("/stats", response_model=StatsResponse)
    def stats(req: StatsRequest) -> StatsResponse:
        return ops.run_stats(req)

    @app.post("/eval", response_model=EvalResponse)
    def evaluate(req: EvalRequest) -> EvalResponse:
        return ops.run_eval(req)

    @app.post("/templates", response_model=TemplatesResponse)
    def templates(req: TemplatesRequest) -> TemplatesResponse:
        return ops.run_templates(req)

    return app


app = create_app()
