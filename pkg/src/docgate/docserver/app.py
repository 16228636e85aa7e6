"""HTTP face of a document server."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from ..binder import ResolveRequest
from ..policy import DeliveryPlan
from . import (
    DigitalizationNotOffered,
    DocumentServer,
    DownloadFailed,
    JobAlreadyDone,
    NotSubscribed,
    PrinterNotAuthorized,
    ResolveFailed,
    UnknownJob,
)


def _error(status: int, code: str, detail: str) -> JSONResponse:
    return JSONResponse({"error": code, "detail": detail}, status_code=status)


def build_app(server: DocumentServer) -> FastAPI:
    app = FastAPI(title=f"document-server {server.institution.id}")
    app.state.server = server

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "service": "document-server", "institution": server.institution.id}

    @app.get("/documents/{key}")
    def get_document(key: str):
        doc = server.get_document(key)
        if doc is None:
            return _error(404, "NotFound", f"no document for {key}")
        return Response(content=doc.data, media_type="application/octet-stream")

    @app.get("/documents/{key}/meta")
    def get_document_meta(key: str):
        doc = server.get_document(key)
        if doc is None:
            return _error(404, "NotFound", f"no document for {key}")
        return doc.to_meta()

    @app.post("/documents/{key}/fetch")
    def fetch_document(key: str, body: dict):
        try:
            meta = ResolveRequest.from_dict(body)
        except (KeyError, TypeError, ValueError) as exc:
            return _error(400, "BadRequest", str(exc))
        try:
            doc = server.fetch_or_cache(key, meta)
        except NotSubscribed as exc:
            return _error(403, "NotSubscribed", str(exc))
        except ResolveFailed as exc:
            return _error(502, "ResolveFailed", str(exc))
        except DownloadFailed as exc:
            return _error(502, "DownloadFailed", str(exc))
        return doc.to_meta()

    @app.post("/documents/{key}/digitalize")
    async def digitalize(key: str, request: Request):
        scan = await request.body()
        if not scan:
            return _error(400, "BadRequest", "scan payload is empty")
        try:
            doc = server.digitalize(key, scan)
        except DigitalizationNotOffered as exc:
            return _error(403, "DigitalizationNotOffered", str(exc))
        except NotSubscribed as exc:
            return _error(403, "NotSubscribed", str(exc))
        return doc.to_meta()

    @app.post("/print-jobs")
    def create_print_job(body: dict):
        try:
            plan = DeliveryPlan.from_dict(body["plan"])
            meta = ResolveRequest.from_dict(body["resolve"]) if body.get("resolve") else None
            args = (
                body["article_key"],
                body["printer_id"],
                plan,
                body["requester_institution"],
            )
        except (KeyError, TypeError, ValueError) as exc:
            return _error(400, "BadRequest", str(exc))
        try:
            job = server.create_print_job(*args, pages=int(body.get("pages", 1)), meta=meta)
        except PrinterNotAuthorized as exc:
            return _error(403, "PrinterNotAuthorized", str(exc))
        except NotSubscribed as exc:
            return _error(403, "NotSubscribed", str(exc))
        except (ResolveFailed, DownloadFailed) as exc:
            return _error(502, "FetchFailed", str(exc))
        return job.to_dict()

    @app.post("/print-jobs/{job_id}/complete")
    async def complete_print_job(job_id: str, request: Request):
        scan = await request.body()
        try:
            job = server.complete_print_job(job_id, scan or None)
        except UnknownJob as exc:
            return _error(404, "UnknownJob", str(exc))
        except JobAlreadyDone as exc:
            return _error(409, "JobAlreadyDone", str(exc))
        except (DigitalizationNotOffered, NotSubscribed) as exc:
            return _error(403, "DigitalizationNotOffered", str(exc))
        return job.to_dict()

    @app.post("/mail-jobs")
    def create_mail_job(body: dict):
        try:
            plan = DeliveryPlan.from_dict(body["plan"])
            args = (
                body["article_key"],
                plan,
                body["requester_institution"],
                body["postal_address"],
            )
        except (KeyError, TypeError, ValueError) as exc:
            return _error(400, "BadRequest", str(exc))
        job = server.create_mail_job(*args, pages=int(body.get("pages", 1)))
        return job.to_dict()

    @app.post("/mail-jobs/{job_id}/complete")
    def complete_mail_job(job_id: str):
        try:
            job = server.complete_mail_job(job_id)
        except UnknownJob as exc:
            return _error(404, "UnknownJob", str(exc))
        except JobAlreadyDone as exc:
            return _error(409, "JobAlreadyDone", str(exc))
        return job.to_dict()

    @app.get("/jobs")
    def list_jobs(state: str | None = None, job_id: str | None = None):
        jobs = server.jobs(state)
        if job_id is not None:
            jobs = [j for j in jobs if j.id == job_id]
        return {"jobs": [j.to_dict() for j in jobs]}

    return app
