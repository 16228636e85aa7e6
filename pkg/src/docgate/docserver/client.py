"""Document-server clients used by the summary service: an HTTP client for
the deployed topology and an in-process one for tests, sharing one contract."""

from __future__ import annotations

from typing import Optional, Protocol

import requests

from ..binder import ResolveRequest
from ..policy import DeliveryPlan
from . import (
    DocumentServer,
    DownloadFailed,
    NotSubscribed,
    PrinterNotAuthorized,
    ResolveFailed,
    UnknownJob,
)


class DocServerError(RuntimeError):
    def __init__(self, code: str, detail: str):
        super().__init__(f"{code}: {detail}")
        self.code = code
        self.detail = detail


class DocServerClient(Protocol):
    base_url: str

    def fetch_document(self, key: str, meta: ResolveRequest) -> dict: ...

    def document_cached(self, key: str) -> bool: ...

    def create_print_job(
        self,
        key: str,
        printer_id: str,
        plan: DeliveryPlan,
        requester_institution: str,
        pages: int,
        meta: Optional[ResolveRequest],
    ) -> dict: ...

    def create_mail_job(
        self,
        key: str,
        plan: DeliveryPlan,
        requester_institution: str,
        postal_address: str,
        pages: int,
    ) -> dict: ...

    def job(self, job_id: str) -> dict: ...


class InProcessDocServerClient:
    def __init__(self, server: DocumentServer, base_url: str = ""):
        self.server = server
        self.base_url = base_url or f"local://{server.institution.id}"

    def fetch_document(self, key: str, meta: ResolveRequest) -> dict:
        try:
            return self.server.fetch_or_cache(key, meta).to_meta()
        except (NotSubscribed, ResolveFailed, DownloadFailed) as exc:
            raise DocServerError(type(exc).__name__, str(exc)) from exc

    def document_cached(self, key: str) -> bool:
        return self.server.storage.exists(key)

    def create_print_job(self, key, printer_id, plan, requester_institution, pages, meta):
        try:
            job = self.server.create_print_job(
                key, printer_id, plan, requester_institution, pages=pages, meta=meta
            )
        except (PrinterNotAuthorized, NotSubscribed, ResolveFailed, DownloadFailed) as exc:
            raise DocServerError(type(exc).__name__, str(exc)) from exc
        return job.to_dict()

    def create_mail_job(self, key, plan, requester_institution, postal_address, pages):
        job = self.server.create_mail_job(
            key, plan, requester_institution, postal_address, pages=pages
        )
        return job.to_dict()

    def job(self, job_id: str) -> dict:
        try:
            return self.server.job(job_id).to_dict()
        except UnknownJob as exc:
            raise DocServerError("UnknownJob", str(exc)) from exc


class HttpDocServerClient:
    def __init__(self, base_url: str, session: Optional[requests.Session] = None):
        self.base_url = base_url.rstrip("/")
        self.session = session or requests.Session()

    def _check(self, resp: requests.Response) -> dict:
        if resp.status_code == 200:
            return resp.json()
        try:
            body = resp.json()
        except ValueError:
            body = {"error": "HttpError", "detail": resp.text}
        raise DocServerError(body.get("error", "HttpError"), body.get("detail", ""))

    def fetch_document(self, key: str, meta: ResolveRequest) -> dict:
        resp = self.session.post(
            f"{self.base_url}/documents/{key}/fetch", json=meta.to_dict(), timeout=60
        )
        return self._check(resp)

    def document_cached(self, key: str) -> bool:
        resp = self.session.get(f"{self.base_url}/documents/{key}/meta", timeout=10)
        return resp.status_code == 200

    def create_print_job(self, key, printer_id, plan, requester_institution, pages, meta):
        body = {
            "article_key": key,
            "printer_id": printer_id,
            "plan": plan.to_dict(),
            "requester_institution": requester_institution,
            "pages": pages,
            "resolve": meta.to_dict() if meta else None,
        }
        return self._check(self.session.post(f"{self.base_url}/print-jobs", json=body, timeout=60))

    def create_mail_job(self, key, plan, requester_institution, postal_address, pages):
        body = {
            "article_key": key,
            "plan": plan.to_dict(),
            "requester_institution": requester_institution,
            "postal_address": postal_address,
            "pages": pages,
        }
        return self._check(self.session.post(f"{self.base_url}/mail-jobs", json=body, timeout=30))

    def job(self, job_id: str) -> dict:
        resp = self.session.get(f"{self.base_url}/jobs", params={"job_id": job_id}, timeout=10)
        body = self._check(resp)
        jobs = body.get("jobs", [])
        if not jobs:
            raise DocServerError("UnknownJob", job_id)
        return jobs[0]
