"""HTTP facade over the annotation service.

JSON API consumed by the labeling UI and by scripted pipelines. Worker
endpoints authenticate with the bearer token minted at registration;
administrative endpoints (batch import, dataset creation) require the
admin token the server was started with. Registration itself is open so
a crowd can onboard without an out-of-band exchange.
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import Depends, FastAPI, Header, HTTPException, Query, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .. import __version__
from ..errors import (
    ArgumentError,
    ConflictError,
    MissingArtifactError,
    PreconditionError,
)
from .service import AnnotationService, Task, VOTE_LABELS, WRITE_FIELDS


class RegisterBody(BaseModel):
    name: str = ""
    metadata: dict = Field(default_factory=dict)


class BatchBody(BaseModel):
    kind: str
    items: list[dict]


class ResponseBody(BaseModel):
    task_id: str
    response: dict
    idempotency_key: str | None = None


class DatasetBody(BaseModel):
    dataset_id: str
    batch_ids: list[str]
    test_n: int = 250
    seed: int = 0


def _task_json(task: Task | None) -> dict:
    if task is None:
        return {"task": None}
    return {
        "task": {
            "task_id": task.task_id,
            "kind": task.kind,
            "batch_id": task.batch_id,
            "payload": task.payload,
            "lease_expires": task.lease_expires,
        }
    }


def create_app(
    service: AnnotationService,
    admin_token: str,
    static_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="pairmine annotation service", version=__version__)

    def bearer(authorization: str | None = Header(default=None)) -> str:
        if not authorization or not authorization.startswith("Bearer "):
            raise HTTPException(status_code=401, detail="missing bearer token")
        return authorization.removeprefix("Bearer ").strip()

    def require_worker(token: str = Depends(bearer)):
        worker = service.worker_by_token(token)
        if worker is None:
            raise HTTPException(status_code=403, detail="unknown worker token")
        return worker

    def require_admin(token: str = Depends(bearer)) -> None:
        if token != admin_token:
            raise HTTPException(status_code=403, detail="admin token required")

    def _handler(status: int):
        async def handle(request: Request, exc: Exception):
            return JSONResponse(status_code=status, content={"detail": str(exc)})

        return handle

    app.add_exception_handler(ArgumentError, _handler(400))
    app.add_exception_handler(ConflictError, _handler(409))
    app.add_exception_handler(PreconditionError, _handler(412))
    app.add_exception_handler(MissingArtifactError, _handler(404))

    @app.get("/api/meta")
    def meta():
        return {
            "service": "pairmine-annosvc",
            "version": __version__,
            "labels": list(VOTE_LABELS),
            "write_fields": list(WRITE_FIELDS),
        }

    @app.post("/api/workers")
    def register(body: RegisterBody):
        metadata = dict(body.metadata)
        if body.name:
            metadata["name"] = body.name
        worker = service.register_worker(metadata)
        return {"worker_id": worker.worker_id, "token": worker.token}

    @app.post("/api/batches", dependencies=[Depends(require_admin)])
    def import_batch(body: BatchBody):
        batch_id, created = service.import_batch(body.items, body.kind)
        return {"batch_id": batch_id, "tasks_created": created}

    @app.get("/api/tasks/next")
    def next_task(
        worker: str = Query(...),
        batch: str = Query(...),
        current=Depends(require_worker),
    ):
        if worker != current.worker_id:
            raise HTTPException(status_code=403, detail="token does not match worker")
        return _task_json(service.next_task(worker, batch))

    @app.post("/api/responses")
    def submit(body: ResponseBody, current=Depends(require_worker)):
        ack = service.submit(
            current.worker_id,
            body.task_id,
            body.response,
            idempotency_key=body.idempotency_key,
        )
        return ack

    @app.get("/api/batches/{batch_id}/progress")
    def progress(batch_id: str, current=Depends(bearer)):
        return service.progress(batch_id)

    @app.post("/api/datasets", dependencies=[Depends(require_admin)])
    def create_dataset(body: DatasetBody):
        dataset = service.create_dataset(
            body.dataset_id, body.batch_ids, body.test_n, body.seed
        )
        return {
            "dataset_id": dataset.dataset_id,
            "examples": len(dataset.examples),
            "aggregated": len(dataset.gold_results),
        }

    @app.get("/api/datasets/{dataset_id}/agreement")
    def agreement(dataset_id: str, current=Depends(bearer)):
        stats = service.dataset_agreement(dataset_id)
        return {
            "pct_individual_eq_gold": stats.pct_individual_eq_gold,
            "pct_no_gold": stats.pct_no_gold,
        }

    @app.get("/api/datasets/{dataset_id}/export")
    def export(dataset_id: str, current=Depends(bearer)):
        rows = service.export_dataset(dataset_id)
        body = "".join(json.dumps(row, sort_keys=True) + "\n" for row in rows)
        return PlainTextResponse(body, media_type="application/x-ndjson")

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
