"""Per-institution document server.

Holds the institution's full-text documents on disk: originals fetched from
editor sites (for electronic subscriptions) and scans of paper holdings.
Fetching is cached and single-flight, so an article is pulled from its
editor at most once no matter how many requests race for it. Print and
postal-mail jobs execute against spool directories, and every executed
paper job appends its accounting records (cross-institution billing,
copyright payment) to the server's ledger.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Callable, Optional

import requests

from ..binder import NoResolver, NotFoundAtEditor, ResolveRequest, UpstreamTimeout
from ..binder.client import BinderClient
from ..ingest.pivot import parse_article_key
from ..policy import (
    Consortium,
    DeliveryMode,
    DeliveryPlan,
    FeeSchedule,
    Format,
    Institution,
    emit_records,
)
from ..util import atomic_write_bytes, format_instant, new_id, parse_instant, utc_now

ORIGIN_DIGITALIZATION = "digitalization"


class NotSubscribed(PermissionError):
    pass


class ResolveFailed(RuntimeError):
    pass


class DownloadFailed(RuntimeError):
    pass


class DigitalizationNotOffered(PermissionError):
    pass


class PrinterNotAuthorized(PermissionError):
    pass


class UnknownJob(LookupError):
    pass


class JobAlreadyDone(RuntimeError):
    pass


@dataclass(frozen=True)
class StoredDocument:
    article_key: str
    origin: str  # "editor-fetch:<url>" or "digitalization"
    data: bytes
    checksum: str
    stored: datetime
    institution: str

    def to_meta(self) -> dict:
        return {
            "article_key": self.article_key,
            "origin": self.origin,
            "checksum": self.checksum,
            "stored": format_instant(self.stored),
            "institution": self.institution,
            "size": len(self.data),
        }


class DocumentStorage:
    """Disk layout: docs/<issn>/<volume>-<issue>/<seq>.bin plus a .json
    sidecar with origin, checksum, and timestamps. Documents are immutable
    once stored; the checksum is verified on every read."""

    def __init__(self, root: Path, institution_id: str):
        self.root = Path(root)
        self.institution_id = institution_id

    def _paths(self, article_key: str) -> tuple[Path, Path]:
        issn, volume, issue, seq = parse_article_key(article_key)
        base = self.root / issn / f"{volume}-{issue}"
        return base / f"{seq}.bin", base / f"{seq}.json"

    def exists(self, article_key: str) -> bool:
        bin_path, meta_path = self._paths(article_key)
        return bin_path.exists() and meta_path.exists()

    def get(self, article_key: str) -> Optional[StoredDocument]:
        bin_path, meta_path = self._paths(article_key)
        if not (bin_path.exists() and meta_path.exists()):
            return None
        meta = json.loads(meta_path.read_text("utf-8"))
        data = bin_path.read_bytes()
        checksum = hashlib.sha256(data).hexdigest()
        if checksum != meta["checksum"]:
            raise IOError(f"document {article_key} corrupted: checksum mismatch")
        return StoredDocument(
            article_key=article_key,
            origin=meta["origin"],
            data=data,
            checksum=checksum,
            stored=parse_instant(meta["stored"]),
            institution=meta["institution"],
        )

    def put(self, article_key: str, data: bytes, origin: str, clock=utc_now) -> StoredDocument:
        existing = self.get(article_key)
        if existing is not None:
            return existing
        doc = StoredDocument(
            article_key=article_key,
            origin=origin,
            data=data,
            checksum=hashlib.sha256(data).hexdigest(),
            stored=clock(),
            institution=self.institution_id,
        )
        bin_path, meta_path = self._paths(article_key)
        atomic_write_bytes(bin_path, data)
        atomic_write_bytes(meta_path, json.dumps(doc.to_meta(), sort_keys=True).encode("utf-8"))
        return doc


@dataclass
class Job:
    id: str
    kind: str  # "print" | "mail"
    article_key: str
    state: str  # "queued" | "done" | "failed"
    created: datetime
    plan: DeliveryPlan
    requester_institution: str
    pages: int = 1
    printer_id: Optional[str] = None
    postal_address: Optional[str] = None
    needs_digitalization: bool = False
    completed: Optional[datetime] = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "article_key": self.article_key,
            "state": self.state,
            "created": format_instant(self.created),
            "completed": format_instant(self.completed) if self.completed else None,
            "plan": self.plan.to_dict(),
            "requester_institution": self.requester_institution,
            "pages": self.pages,
            "printer_id": self.printer_id,
            "postal_address": self.postal_address,
            "needs_digitalization": self.needs_digitalization,
            "detail": self.detail,
        }


def simulated_scan(article_key: str) -> bytes:
    """Stand-in for the scanner hardware when no scan file is supplied."""
    return f"%SCAN {article_key}\n".encode("ascii") + b"digitalized page\n" * 4


class DocumentServer:
    def __init__(
        self,
        institution: Institution,
        consortium: Consortium,
        fees: FeeSchedule,
        binder: Optional[BinderClient],
        data_dir: Path,
        clock: Callable[[], datetime] = utc_now,
    ):
        self.institution = institution
        self.consortium = consortium
        self.fees = fees
        self.binder = binder
        self.data_dir = Path(data_dir)
        self.clock = clock
        self.storage = DocumentStorage(self.data_dir / "docs", institution.id)
        self.spool_dir = self.data_dir / "spool"
        self.ledger_path = self.data_dir / "ledger.jsonl"
        self.http = requests.Session()
        self._jobs: dict[str, Job] = {}
        self._jobs_lock = threading.Lock()
        self._ledger_lock = threading.Lock()
        self._flight_guard = threading.Lock()
        self._flight_locks: dict[str, threading.Lock] = {}

    # -- documents ---------------------------------------------------------

    def get_document(self, article_key: str) -> Optional[StoredDocument]:
        return self.storage.get(article_key)

    def fetch_or_cache(self, article_key: str, meta: ResolveRequest) -> StoredDocument:
        """Cached fetch of an electronic original.

        A hit never touches the binder. Concurrent misses for one key
        serialize on a per-key lock and re-check the cache inside it, so
        exactly one upstream resolution and download happen.
        """
        issn = parse_article_key(article_key)[0]
        if not self.consortium.subscribes(self.institution.id, issn, Format.ELECTRONIC):
            raise NotSubscribed(
                f"{self.institution.id} holds no electronic subscription for {issn}"
            )
        doc = self.storage.get(article_key)
        if doc is not None:
            return doc
        with self._flight_guard:
            lock = self._flight_locks.setdefault(article_key, threading.Lock())
        with lock:
            doc = self.storage.get(article_key)
            if doc is not None:
                return doc
            if self.binder is None:
                raise ResolveFailed("no binder configured")
            try:
                result = self.binder.resolve(meta)
            except (NoResolver, NotFoundAtEditor, UpstreamTimeout) as exc:
                raise ResolveFailed(str(exc)) from exc
            try:
                resp = self.http.get(result.url, timeout=30)
            except requests.RequestException as exc:
                raise DownloadFailed(f"download of {result.url} failed: {exc}") from exc
            if resp.status_code != 200 or not resp.content:
                raise DownloadFailed(
                    f"download of {result.url} answered {resp.status_code} "
                    f"with {len(resp.content)} bytes"
                )
            return self.storage.put(
                article_key, resp.content, f"editor-fetch:{result.url}", clock=self.clock
            )

    def digitalize(self, article_key: str, scan: bytes) -> StoredDocument:
        """Store a scan of a paper holding; idempotent per article key."""
        issn = parse_article_key(article_key)[0]
        if not self.institution.can_digitalize:
            raise DigitalizationNotOffered(f"{self.institution.id} cannot digitalize")
        if not self.consortium.subscribes(self.institution.id, issn, Format.PAPER):
            raise NotSubscribed(f"{self.institution.id} holds no paper subscription for {issn}")
        existing = self.storage.get(article_key)
        if existing is not None:
            return existing
        with self._flight_guard:
            lock = self._flight_locks.setdefault(article_key, threading.Lock())
        with lock:
            existing = self.storage.get(article_key)
            if existing is not None:
                return existing
            return self.storage.put(article_key, scan, ORIGIN_DIGITALIZATION, clock=self.clock)

    # -- jobs ----------------------------------------------------------------

    def job(self, job_id: str) -> Job:
        with self._jobs_lock:
            job = self._jobs.get(job_id)
        if job is None:
            raise UnknownJob(job_id)
        return job

    def jobs(self, state: Optional[str] = None) -> list[Job]:
        with self._jobs_lock:
            out = list(self._jobs.values())
        if state is not None:
            out = [j for j in out if j.state == state]
        out.sort(key=lambda j: (j.created, j.id))
        return out

    def _add_job(self, job: Job) -> Job:
        with self._jobs_lock:
            self._jobs[job.id] = job
        return job

    def _transition(self, job: Job, from_state: str, to_state: str) -> None:
        # compare-and-set: completing a job twice must fail the second time
        with self._jobs_lock:
            if job.state != from_state:
                raise JobAlreadyDone(f"job {job.id} is {job.state}, not {from_state}")
            job.state = to_state
            job.completed = self.clock() if to_state == "done" else job.completed

    def create_print_job(
        self,
        article_key: str,
        printer_id: str,
        plan: DeliveryPlan,
        requester_institution: str,
        pages: int = 1,
        meta: Optional[ResolveRequest] = None,
    ) -> Job:
        requester = self.consortium.institution(requester_institution)
        if printer_id not in requester.authorized_printers:
            raise PrinterNotAuthorized(
                f"printer {printer_id!r} is not authorized at {requester_institution}"
            )
        job = Job(
            id=new_id("job"),
            kind="print",
            article_key=article_key,
            state="queued",
            created=self.clock(),
            plan=plan,
            requester_institution=requester_institution,
            pages=pages,
            printer_id=printer_id,
            needs_digitalization=plan.mode == DeliveryMode.DIGITALIZE_THEN_PRINT,
        )
        self._add_job(job)
        if plan.mode == DeliveryMode.PRINT_AT_AUTHORIZED_PRINTER:
            # electronic original: fetch (cached) and print right away
            if meta is None:
                raise ResolveFailed(f"print job for {article_key} needs resolve metadata")
            doc = self.fetch_or_cache(article_key, meta)
            self.execute_print(job, doc)
        elif job.needs_digitalization and self.storage.exists(article_key):
            # already digitalized earlier: no manual step left
            doc = self.storage.get(article_key)
            assert doc is not None
            self.execute_print(job, doc)
        return job

    def complete_print_job(self, job_id: str, scan: Optional[bytes] = None) -> Job:
        """Operator action for digitalize-then-print jobs: supply the scan
        (or let the simulated scanner produce one) and run the printout."""
        job = self.job(job_id)
        if job.kind != "print":
            raise UnknownJob(f"{job_id} is not a print job")
        if job.state == "done":
            raise JobAlreadyDone(job_id)
        doc = self.storage.get(job.article_key)
        if doc is None:
            doc = self.digitalize(job.article_key, scan or simulated_scan(job.article_key))
        self.execute_print(job, doc)
        return job

    def execute_print(self, job: Job, doc: StoredDocument) -> Job:
        """Queued -> done: write the bytes to the printer's spool directory
        and account for the copy."""
        self._transition(job, "queued", "done")
        spool = self.spool_dir / "printers" / str(job.printer_id)
        spool.mkdir(parents=True, exist_ok=True)
        (spool / f"{job.id}.prn").write_bytes(doc.data)
        job.detail = f"printed on {job.printer_id}"
        self._account(job)
        return job

    def create_mail_job(
        self,
        article_key: str,
        plan: DeliveryPlan,
        requester_institution: str,
        postal_address: str,
        pages: int = 1,
    ) -> Job:
        job = Job(
            id=new_id("job"),
            kind="mail",
            article_key=article_key,
            state="queued",
            created=self.clock(),
            plan=plan,
            requester_institution=requester_institution,
            pages=pages,
            postal_address=postal_address,
        )
        return self._add_job(job)

    def complete_mail_job(self, job_id: str) -> Job:
        """Operator action: the photocopy was made and mailed."""
        job = self.job(job_id)
        if job.kind != "mail":
            raise UnknownJob(f"{job_id} is not a mail job")
        self._transition(job, "queued", "done")
        spool = self.spool_dir / "mail"
        spool.mkdir(parents=True, exist_ok=True)
        (spool / f"{job.id}.txt").write_text(
            f"To: {job.postal_address}\nArticle: {job.article_key}\nPages: {job.pages}\n",
            "utf-8",
        )
        job.detail = f"photocopy mailed to {job.postal_address}"
        self._account(job)
        return job

    # -- accounting ---------------------------------------------------------

    def _account(self, job: Job) -> None:
        requester = self.consortium.institution(job.requester_institution)
        billing, copyright_rec = emit_records(
            job.plan, requester, job.article_key, self.fees, pages=job.pages, clock=self.clock
        )
        with self._ledger_lock:
            self.ledger_path.parent.mkdir(parents=True, exist_ok=True)
            with self.ledger_path.open("a", encoding="utf-8") as fh:
                if billing is not None:
                    fh.write(json.dumps({"kind": "billing", **billing.to_dict()}) + "\n")
                if copyright_rec is not None:
                    fh.write(json.dumps({"kind": "copyright", **copyright_rec.to_dict()}) + "\n")

    def ledger(self) -> list[dict]:
        if not self.ledger_path.exists():
            return []
        with self.ledger_path.open(encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]
