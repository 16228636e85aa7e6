"""HTTP face of the summary server, plus its single-instance startup lock.

One summary server serves the whole consortium; a file lock in the data
directory makes a second start attempt on the same deployment fail fast
and cleanly. The requester address comes from the connection, unless the
peer is a configured trusted proxy sending X-Forwarded-For.
"""

from __future__ import annotations

import fcntl
import hmac
from contextlib import asynccontextmanager
from datetime import datetime
from pathlib import Path
from typing import Callable, Optional

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse

from ..config import AppConfig
from ..digest import DigestService, SinkUnavailable, build_sink
from ..docserver.client import HttpDocServerClient
from ..ingest.pivot import SchemaViolation, parse_pivot_document
from ..ingest.store import SummaryStore
from ..policy import RightsDenied, UnknownCategory, UserContext
from ..util import parse_instant, utc_now
from .alerts import AlertStore, UnknownIssn, UnknownSubscription
from .database import SummaryDatabase
from .events import EventLog, InvalidRange
from .service import (
    ArticleNotFound,
    ArticleUnavailable,
    RequestNotFound,
    SummaryService,
    UpstreamFailure,
)


class AlreadyRunning(RuntimeError):
    pass


class StartupLock:
    """Advisory exclusive lock; held for the server's lifetime and released
    automatically if the process dies."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = self.path.open("w")
        try:
            fcntl.flock(self._fh, fcntl.LOCK_EX | fcntl.LOCK_NB)
        except OSError:
            self._fh.close()
            raise AlreadyRunning(
                f"another summary server already holds {self.path}"
            ) from None

    def release(self) -> None:
        try:
            fcntl.flock(self._fh, fcntl.LOCK_UN)
        finally:
            self._fh.close()


def build_service(
    config: AppConfig,
    docserver_clients: Optional[dict] = None,
    clock: Callable[[], datetime] = utc_now,
) -> SummaryService:
    """Wire a summary service over the configured data directory."""
    data_dir = config.summary.data_dir
    store = SummaryStore(data_dir)
    db = SummaryDatabase(store, config.consortium.journals)
    events = EventLog(data_dir / "events.jsonl")
    alerts = AlertStore(data_dir / "alerts.json", config.consortium.journals)
    sink = build_sink(
        config.summary.mail_sink,
        config.summary.mail_spool_dir or data_dir / "mail-spool",
    )
    arrivals_log = data_dir / "new-arrivals.jsonl"
    digest = DigestService(
        arrivals_log=arrivals_log,
        store=store,
        alerts=alerts,
        sink=sink,
        state_path=data_dir / "digest-state.json",
        clock=clock,
    )
    if docserver_clients is None:
        docserver_clients = {
            inst.id: HttpDocServerClient(inst.document_server)
            for inst in config.consortium.institutions.values()
            if inst.document_server
        }
    return SummaryService(
        consortium=config.consortium,
        fees=config.fees,
        store=store,
        db=db,
        events=events,
        alerts=alerts,
        digest=digest,
        docserver_clients=docserver_clients,
        arrivals_log=arrivals_log,
        admin_log_path=data_dir / "admin-log.jsonl",
        notification_sink=sink,
        clock=clock,
    )


def _error(status: int, code: str, detail: str) -> JSONResponse:
    return JSONResponse({"error": code, "detail": detail}, status_code=status)


def build_app(
    config: AppConfig,
    service: Optional[SummaryService] = None,
    with_lock: bool = True,
) -> FastAPI:
    lock = StartupLock(config.summary.data_dir / "summary.lock") if with_lock else None
    svc = service or build_service(config)

    @asynccontextmanager
    async def lifespan(_app):
        try:
            yield
        finally:
            if lock is not None:
                lock.release()

    app = FastAPI(title="summary-server", lifespan=lifespan)
    app.state.service = svc
    app.state.lock = lock
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    def client_ip(request: Request) -> str:
        peer = request.client.host if request.client else ""
        if peer in config.trusted_proxies:
            forwarded = request.headers.get("x-forwarded-for", "")
            if forwarded:
                return forwarded.split(",")[0].strip()
        return peer

    def admin_caller(request: Request) -> Optional[str]:
        """Admin identity, or None when the bearer token does not match."""
        if not config.admin_token:
            return None
        header = request.headers.get("authorization", "")
        token = header.removeprefix("Bearer ").strip()
        if token and hmac.compare_digest(token, config.admin_token):
            return "admin"
        return None

    # -- public ---------------------------------------------------------------

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "service": "summary-server"}

    @app.get("/journals")
    def journals(domain: Optional[str] = None):
        return {"domains": svc.list_journals(domain)}

    @app.get("/journals/{issn}/issues")
    def issues(issn: str, request: Request, category: Optional[str] = None):
        try:
            return svc.list_issues(issn, client_ip(request), category)
        except UnknownCategory as exc:
            return _error(400, "UnknownCategory", str(exc))

    @app.get("/search")
    def search(request: Request, q: str = "", category: Optional[str] = None):
        try:
            hits = svc.search(q, client_ip(request), category)
        except RightsDenied as exc:
            return _error(403, "RightsDenied", str(exc))
        except UnknownCategory as exc:
            return _error(400, "UnknownCategory", str(exc))
        return {"query": q, "hits": [h.to_dict() for h in hits]}

    @app.post("/requests")
    def create_request(body: dict, request: Request):
        category = body.get("category", "")
        user = UserContext(
            source_ip=client_ip(request), category=category, email=body.get("email")
        )
        try:
            record = svc.request_article(body.get("article_key", ""), user)
        except ArticleNotFound as exc:
            return _error(404, "NotFound", str(exc))
        except UnknownCategory as exc:
            return _error(400, "UnknownCategory", str(exc))
        except RightsDenied as exc:
            return _error(403, "RightsDenied", str(exc))
        except ArticleUnavailable as exc:
            return _error(409, "Unavailable", str(exc))
        except UpstreamFailure as exc:
            return _error(502, "UpstreamFailure", str(exc))
        except ValueError as exc:
            return _error(400, "BadRequest", str(exc))
        return record.to_dict()

    @app.get("/requests/{request_id}")
    def request_status(request_id: str):
        try:
            return svc.request_status(request_id).to_dict()
        except RequestNotFound as exc:
            return _error(404, "NotFound", str(exc))

    @app.post("/alerts")
    def create_alert(body: dict):
        email = body.get("email", "").strip()
        if not email:
            return _error(400, "BadRequest", "email is required")
        try:
            sub = svc.create_alert(email, list(body.get("issns", [])))
        except UnknownIssn as exc:
            return _error(400, "UnknownIssn", str(exc))
        return JSONResponse(sub.to_dict(), status_code=201)

    @app.get("/alerts")
    def list_alerts(email: Optional[str] = None):
        return {"subscriptions": [s.to_dict() for s in svc.list_alerts(email)]}

    @app.delete("/alerts/{sub_id}")
    def delete_alert(sub_id: str):
        try:
            return svc.delete_alert(sub_id).to_dict()
        except UnknownSubscription as exc:
            return _error(404, "NotFound", str(exc))

    # -- administration ---------------------------------------------------------

    @app.put("/admin/summaries/{key}")
    def patch_summary(key: str, body: dict, request: Request):
        admin = admin_caller(request)
        if admin is None:
            return _error(401, "AuthRequired", "admin bearer token required")
        try:
            return {"summary": svc.admin_patch_summary(key, body, admin)}
        except ArticleNotFound as exc:
            return _error(404, "NotFound", str(exc))
        except SchemaViolation as exc:
            return _error(400, "SchemaViolation", str(exc))

    @app.post("/admin/summaries")
    async def add_summary(request: Request):
        admin = admin_caller(request)
        if admin is None:
            return _error(401, "AuthRequired", "admin bearer token required")
        raw = await request.body()
        try:
            s = parse_pivot_document(raw)
            return JSONResponse({"summary": svc.admin_add_summary(s, admin)}, status_code=201)
        except SchemaViolation as exc:
            return _error(400, "SchemaViolation", str(exc))

    @app.get("/admin/stats/export")
    def stats_export(request: Request, start: str = "", end: str = ""):
        admin = admin_caller(request)
        if admin is None:
            return _error(401, "AuthRequired", "admin bearer token required")
        try:
            csv_text = svc.export_stats(parse_instant(start), parse_instant(end))
        except (InvalidRange, ValueError) as exc:
            return _error(400, "InvalidRange", str(exc))
        return PlainTextResponse(csv_text, media_type="text/csv")

    @app.post("/admin/digest/run")
    def digest_run(request: Request):
        admin = admin_caller(request)
        if admin is None:
            return _error(401, "AuthRequired", "admin bearer token required")
        try:
            run = svc.run_digest()
        except SinkUnavailable as exc:
            return _error(503, "SinkUnavailable", str(exc))
        return {
            "run_id": run.run_id,
            "window_start": run.window_start.isoformat(),
            "window_end": run.window_end.isoformat(),
            "messages": [
                {"email": m.email, "summary_keys": list(m.summary_keys)} for m in run.messages
            ],
        }

    return app
