"""Minimal HTTP front end: ``POST /grade`` and ``GET /health``.

Request body for ``/grade``::

    {"source": "...", "language": "python", "level": "hard", "student_id": "s-42"}

``level`` and ``student_id`` are optional. The response body is the same
report document the ``grade`` command prints.
"""

from __future__ import annotations

import json
import logging
import tempfile
from pathlib import Path
from typing import Callable, Iterable

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from .history import HistoryStore
from .inspectors import InspectorConfig
from .penalty import DEFAULT_WINDOW
from .report import build_report
from .taxonomy import Difficulty, RuleRegistry

log = logging.getLogger(__name__)

SUFFIXES = {"python": ".py", "java": ".java"}


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse({"error": message}, status_code=status)


def create_app(
    registries: Callable[[str], RuleRegistry],
    configs: Iterable[InspectorConfig] = (),
    store: HistoryStore | None = None,
    window: int = DEFAULT_WINDOW,
) -> FastAPI:
    configs = list(configs)
    app = FastAPI(title="stylegrader")

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/grade")
    async def grade(request: Request) -> Response:
        try:
            body = json.loads(await request.body())
        except (json.JSONDecodeError, UnicodeDecodeError):
            return _error(400, "request body must be a JSON object")
        if not isinstance(body, dict):
            return _error(400, "request body must be a JSON object")

        source, language = body.get("source"), body.get("language")
        level_name, student_id = body.get("level", "hard"), body.get("student_id")
        if not isinstance(source, str):
            return _error(400, "'source' (string) is required")
        if not isinstance(language, str):
            return _error(400, "'language' (string) is required")
        if not isinstance(level_name, str) or level_name.upper() not in Difficulty.__members__:
            return _error(400, "'level' must be one of easy, medium, hard")
        if student_id is not None and (not isinstance(student_id, str) or not student_id):
            return _error(400, "'student_id' must be a non-empty string")
        if language not in SUFFIXES:
            return _error(422, f"unsupported language {language!r}")

        try:
            registry = registries(language)
            with tempfile.TemporaryDirectory(prefix="stylegrader-") as tmp:
                path = Path(tmp) / f"submission{SUFFIXES[language]}"
                path.write_text(source, encoding="utf-8")
                report = build_report(
                    path,
                    language,
                    Difficulty.parse(level_name),
                    registry,
                    configs,
                    store if student_id else None,
                    student_id,
                    window=window,
                )
        except Exception:
            log.exception("grading request failed")
            return _error(500, "internal error")
        return Response(report.to_json(), media_type="application/json")

    return app


def serve(app: FastAPI, host: str = "127.0.0.1", port: int = 8000) -> None:
    import uvicorn

    uvicorn.run(app, host=host, port=port)
