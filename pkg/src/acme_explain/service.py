"""HTTP service for interactive explanation and what-if queries.

Sessions (dataset + model + grid) are loaded at startup and immutable
afterwards; global explanations are computed lazily once per session.
All bodies reuse the CLI's explanation document schema.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from .engine import (
    ExplainError,
    classification_explain,
    local_explain,
    global_explain,
)
from .export import dumps, to_document
from .models import CLASSIFICATION, ModelError, Predictor, REGRESSION, predict_batch
from .tabular import Dataset, Kind, QuantileGrid, TabularError


class ServiceError(ValueError):
    pass


@dataclass
class Session:
    """One loaded dataset/model pair with a lazily cached explanation."""

    id: str
    name: str
    dataset: Dataset
    model: Predictor
    grid: QuantileGrid
    class_names: Optional[tuple[str, ...]] = None
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    _global_doc: Optional[dict] = field(default=None, repr=False)

    @property
    def task(self) -> str:
        return self.model.task

    def summary(self) -> dict:
        info = {
            "id": self.id,
            "name": self.name,
            "task": self.task,
            "n": self.dataset.n_rows,
            "p": self.dataset.n_features,
        }
        if self.task == CLASSIFICATION:
            info["class_names"] = list(self._classes())
        return info

    def _classes(self) -> tuple[str, ...]:
        if self.class_names is not None:
            return self.class_names
        return tuple(str(c) for c in range(self.model.n_classes or 0))

    def global_document(self) -> dict:
        # compute-once cache; double-checked under the session lock
        if self._global_doc is None:
            with self._lock:
                if self._global_doc is None:
                    if self.task == CLASSIFICATION:
                        expl = classification_explain(
                            self.model, self.dataset, self.grid,
                            scope="global", class_names=self._classes(),
                        )
                    else:
                        expl = global_explain(self.model, self.dataset, self.grid)
                    self._global_doc = to_document(expl)
        return self._global_doc

    def local_document(self, row: int) -> dict:
        if not 0 <= row < self.dataset.n_rows:
            raise ServiceError(
                f"row {row} out of range [0, {self.dataset.n_rows})"
            )
        if self.task == CLASSIFICATION:
            expl = classification_explain(
                self.model, self.dataset, self.grid,
                scope="local", row=row, class_names=self._classes(),
            )
        else:
            expl = local_explain(self.model, self.dataset, row, self.grid)
        return to_document(expl)

    def whatif(self, row: int, edits: dict) -> dict:
        if not 0 <= row < self.dataset.n_rows:
            raise ServiceError(
                f"row {row} out of range [0, {self.dataset.n_rows})"
            )
        observation = list(self.dataset.row(row))
        for name, value in edits.items():
            j = self.dataset.feature_index(name)
            kind = self.dataset.columns[j].kind
            if kind is Kind.NUMERIC:
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ServiceError(
                        f"feature {name!r} is numeric, got {value!r}"
                    )
                observation[j] = float(value)
            else:
                if not isinstance(value, str):
                    raise ServiceError(
                        f"feature {name!r} is categorical, got {value!r}"
                    )
                if value not in self.dataset.columns[j].distinct_levels:
                    raise ServiceError(
                        f"unknown level {value!r} for feature {name!r}"
                    )
                observation[j] = value
        original = predict_batch(self.model, [self.dataset.row(row)])[0]
        modified = predict_batch(self.model, [observation])[0]
        if self.task == CLASSIFICATION:
            return {
                "original": [float(v) for v in original],
                "modified": [float(v) for v in modified],
                "delta": [float(m - o) for o, m in zip(original, modified)],
            }
        return {
            "original": float(original),
            "modified": float(modified),
            "delta": float(modified) - float(original),
        }


def _json_response(payload, status_code: int = 200) -> Response:
    return Response(content=dumps(payload) + "\n", status_code=status_code,
                    media_type="application/json")


def create_app(sessions: Sequence[Session]) -> FastAPI:
    if not sessions:
        raise ServiceError("at least one session must be configured")
    by_id = {s.id: s for s in sessions}
    if len(by_id) != len(sessions):
        raise ServiceError("session ids must be unique")
    app = FastAPI(title="acme-explain")

    def lookup(session_id: str) -> Optional[Session]:
        return by_id.get(session_id)

    @app.exception_handler(ServiceError)
    async def bad_request(_req: Request, exc: ServiceError):
        return _json_response({"error": str(exc)}, 400)

    @app.exception_handler(TabularError)
    async def tabular_error(_req: Request, exc: TabularError):
        return _json_response({"error": str(exc)}, 400)

    @app.get("/sessions")
    async def list_sessions():
        return _json_response([s.summary() for s in sessions])

    @app.get("/sessions/{session_id}/explain/global")
    async def explain_global(session_id: str):
        s = lookup(session_id)
        if s is None:
            return _json_response({"error": f"unknown session {session_id!r}"}, 404)
        return _json_response(s.global_document())

    @app.get("/sessions/{session_id}/explain/local/{row}")
    async def explain_local(session_id: str, row: int):
        s = lookup(session_id)
        if s is None:
            return _json_response({"error": f"unknown session {session_id!r}"}, 404)
        return _json_response(s.local_document(row))

    @app.post("/sessions/{session_id}/whatif")
    async def whatif(session_id: str, request: Request):
        s = lookup(session_id)
        if s is None:
            return _json_response({"error": f"unknown session {session_id!r}"}, 404)
        try:
            body = await request.json()
        except Exception:
            return _json_response({"error": "request body must be JSON"}, 400)
        if not isinstance(body, dict) or "row" not in body:
            return _json_response({"error": "body must carry 'row' and 'edits'"}, 400)
        row = body["row"]
        edits = body.get("edits", {})
        if not isinstance(row, int) or isinstance(row, bool):
            return _json_response({"error": "'row' must be an integer"}, 400)
        if not isinstance(edits, dict):
            return _json_response({"error": "'edits' must be an object"}, 400)
        return _json_response(s.whatif(row, edits))

    return app


def serve(sessions: Sequence[Session], port: int = 8000, host: str = "127.0.0.1"):
    """Run the service; blocks until interrupted."""
    import uvicorn

    app = create_app(sessions)
    uvicorn.run(app, host=host, port=port, log_level="warning")
