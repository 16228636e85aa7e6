"""Orchestration behind the summary server's endpoints.

This is where a click on an article turns into a delivery: resolve the
requester's institution from their address, look up their category's
rights, run the delivery planner, then either hand back a document locator
(electronic, local) or queue a job on the right document server (paper,
shared). The requester never picks the supplying institution; localisation
is entirely internal.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass, replace
from datetime import date, datetime
from pathlib import Path
from typing import Callable, Mapping, Optional

from ..binder import ResolveRequest
from ..digest import DigestRun, DigestService, MailSink
from ..ingest.pipeline import record_arrival
from ..ingest.pivot import ArticleRef, PivotSummary, SchemaViolation
from ..ingest.store import SummaryStore
from ..ingest.validation import validate
from ..policy import (
    Consortium,
    DeliveryMode,
    DeliveryPlan,
    FeeSchedule,
    Institution,
    RightsDenied,
    ServiceRights,
    UnknownCategory,
    UserContext,
    plan_delivery,
    resolve_institution,
    rights_for,
)
from ..util import format_instant, new_id, utc_now
from .alerts import AlertStore, AlertSubscription
from .database import SummaryDatabase
from .events import (
    KIND_BROWSE,
    KIND_DOWNLOADED,
    KIND_SEARCH,
    NONE_MARK,
    AccessEvent,
    EventLog,
    export_stats_csv,
    planned_kind,
)
from .search import SearchHit

log = logging.getLogger(__name__)

# availability icons shown next to issues and articles
ICON_ELECTRONIC_LOCAL = "ElectronicLocal"
ICON_CACHED_FAST = "CachedFast"
ICON_PAPER_SHARED = "PaperShared"
ICON_MAIL_ONLY = "MailOnly"
ICON_UNAVAILABLE = "Unavailable"

STATUS_READY = "ready"
STATUS_DEFERRED = "deferred"


class ArticleNotFound(LookupError):
    pass


class RequestNotFound(LookupError):
    pass


class ArticleUnavailable(RuntimeError):
    pass


class UpstreamFailure(RuntimeError):
    pass


@dataclass
class RequestRecord:
    id: str
    article_key: str
    institution: str
    plan: DeliveryPlan
    status: str
    created: datetime
    email: Optional[str] = None
    locator: Optional[str] = None
    message: str = ""
    job_institution: Optional[str] = None
    job_id: Optional[str] = None
    notified: bool = False

    def to_dict(self) -> dict:
        return {
            "request_id": self.id,
            "article_key": self.article_key,
            "institution": self.institution,
            "plan": self.plan.to_dict(),
            "status": self.status,
            "created": format_instant(self.created),
            "locator": self.locator,
            "message": self.message,
            "job_id": self.job_id,
            "job_institution": self.job_institution,
        }


def summary_to_dict(s: PivotSummary) -> dict:
    return {
        "key": s.key,
        "issn": s.issn,
        "journal_title": s.journal_title,
        "volume": s.volume,
        "issue": s.issue,
        "date": s.cover_date.isoformat(),
        "provider": s.provider,
        "arrival": format_instant(s.arrival),
        "articles": [
            {
                "key": k,
                "seq": a.seq,
                "title": a.title,
                "authors": list(a.authors),
                "first_page": a.first_page,
                "last_page": a.last_page,
                "abstract": a.abstract,
            }
            for k, a in zip(s.article_keys(), s.articles)
        ],
    }


def apply_patch(s: PivotSummary, patch: Mapping) -> PivotSummary:
    """Field-level corrections to a stored summary.

    Top level accepts journal_title, cover_date, and articles; each article
    patch names its seq and may update title, authors, abstract, and the
    page range. Anything else is a schema violation.
    """
    allowed = {"journal_title", "cover_date", "articles"}
    unknown = set(patch) - allowed
    if unknown:
        raise SchemaViolation(f"unknown patch fields: {', '.join(sorted(unknown))}")
    updated = s
    if "journal_title" in patch:
        updated = replace(updated, journal_title=str(patch["journal_title"]))
    if "cover_date" in patch:
        try:
            updated = replace(updated, cover_date=date.fromisoformat(patch["cover_date"]))
        except (TypeError, ValueError):
            raise SchemaViolation("cover_date must be YYYY-MM-DD") from None
    if "articles" in patch:
        allowed_article = {"seq", "title", "authors", "abstract", "first_page", "last_page"}
        articles = list(updated.articles)
        for ap in patch["articles"]:
            unknown = set(ap) - allowed_article
            if unknown:
                raise SchemaViolation(f"unknown article patch fields: {', '.join(sorted(unknown))}")
            if "seq" not in ap:
                raise SchemaViolation("article patch needs a seq")
            idx = next((i for i, a in enumerate(articles) if a.seq == ap["seq"]), None)
            if idx is None:
                raise SchemaViolation(f"no article with seq {ap['seq']}")
            a = articles[idx]
            articles[idx] = ArticleRef(
                seq=a.seq,
                title=str(ap.get("title", a.title)),
                authors=tuple(ap["authors"]) if "authors" in ap else a.authors,
                first_page=int(ap.get("first_page", a.first_page)),
                last_page=int(ap.get("last_page", a.last_page)),
                abstract=ap.get("abstract", a.abstract),
            )
        updated = replace(updated, articles=tuple(articles))
    return updated


class SummaryService:
    def __init__(
        self,
        consortium: Consortium,
        fees: FeeSchedule,
        store: SummaryStore,
        db: SummaryDatabase,
        events: EventLog,
        alerts: AlertStore,
        digest: DigestService,
        docserver_clients: Mapping[str, object],
        arrivals_log: Path,
        admin_log_path: Path,
        notification_sink: Optional[MailSink] = None,
        clock: Callable[[], datetime] = utc_now,
    ):
        self.consortium = consortium
        self.fees = fees
        self.store = store
        self.db = db
        self.events = events
        self.alerts = alerts
        self.digest = digest
        self.docservers = dict(docserver_clients)
        self.arrivals_log = Path(arrivals_log)
        self.admin_log_path = Path(admin_log_path)
        self.notification_sink = notification_sink
        self.clock = clock
        self._requests: dict[str, RequestRecord] = {}
        self._requests_lock = threading.Lock()

    # -- affiliation / rights ---------------------------------------------

    def resolve_requester(self, ip: str) -> Optional[Institution]:
        try:
            return resolve_institution(ip, self.consortium.institutions.values())
        except ValueError:
            return None  # unparseable address: treat as unaffiliated

    def _rights(self, inst: Optional[Institution], category: Optional[str]) -> ServiceRights:
        """Effective rights for planning. Unaffiliated visitors browse only;
        affiliated users without a stated category get the availability view
        (icons show what the institution could deliver, personal gating
        applies when an actual request states its category)."""
        if inst is None:
            return ServiceRights.navigation_only()
        if category is None:
            return ServiceRights.all_services()
        return rights_for(UserContext(source_ip="", category=category), inst)

    def _docserver(self, inst_id: str):
        client = self.docservers.get(inst_id)
        if client is None:
            raise UpstreamFailure(f"no document server configured for {inst_id}")
        return client

    # -- browse -------------------------------------------------------------

    def list_journals(self, domain: Optional[str] = None) -> list[dict]:
        groups: dict[str, list] = {}
        for j in self.consortium.journals.values():
            for d in j.domains:
                if domain is not None and d != domain:
                    continue
                groups.setdefault(d, []).append(j)
        out = []
        for d in sorted(groups):
            journals = sorted(groups[d], key=lambda j: j.title.lower())
            out.append(
                {
                    "domain": d,
                    "journals": [
                        {
                            "issn": j.issn,
                            "title": j.title,
                            "domains": list(j.domains),
                            "editor": j.editor,
                        }
                        for j in journals
                    ],
                }
            )
        return out

    def list_issues(self, issn: str, requester_ip: str, category: Optional[str] = None) -> dict:
        inst = self.resolve_requester(requester_ip)
        journal = self.consortium.journal(issn)
        icon = self._availability_icon(inst, category, issn)
        issues = []
        for s in self.db.issues_for(issn):
            articles = []
            for k, a in zip(s.article_keys(), s.articles):
                art_icon = icon
                if icon == ICON_ELECTRONIC_LOCAL and inst is not None:
                    art_icon = self._maybe_cached(inst, k)
                articles.append(
                    {
                        "key": k,
                        "seq": a.seq,
                        "title": a.title,
                        "authors": list(a.authors),
                        "pages": {"first": a.first_page, "last": a.last_page},
                        "icon": art_icon,
                    }
                )
            issues.append(
                {
                    "volume": s.volume,
                    "issue": s.issue,
                    "date": s.cover_date.isoformat(),
                    "key": s.key,
                    "articles": articles,
                }
            )
        self.events.append(
            AccessEvent(
                timestamp=self.clock(),
                institution=inst.id if inst else NONE_MARK,
                issn=issn,
                kind=KIND_BROWSE,
            )
        )
        return {
            "issn": issn,
            "journal": journal.title if journal else None,
            "issues": issues,
        }

    def _availability_icon(
        self, inst: Optional[Institution], category: Optional[str], issn: str
    ) -> str:
        if inst is None:
            return ICON_UNAVAILABLE
        try:
            rights = self._rights(inst, category)
            plan = plan_delivery(inst, rights, issn, self.consortium)
        except (RightsDenied, UnknownCategory):
            return ICON_UNAVAILABLE
        if plan.mode == DeliveryMode.ELECTRONIC_TO_WORKSTATION:
            return ICON_ELECTRONIC_LOCAL
        if plan.mode in (DeliveryMode.PRINT_AT_AUTHORIZED_PRINTER, DeliveryMode.DIGITALIZE_THEN_PRINT):
            return ICON_PAPER_SHARED
        if plan.mode == DeliveryMode.PHOTOCOPY_POSTAL_MAIL:
            return ICON_MAIL_ONLY
        return ICON_UNAVAILABLE

    def _maybe_cached(self, inst: Institution, article_key: str) -> str:
        try:
            client = self._docserver(inst.id)
            if client.document_cached(article_key):
                return ICON_CACHED_FAST
        except Exception:
            pass
        return ICON_ELECTRONIC_LOCAL

    # -- search ---------------------------------------------------------------

    def search(
        self, query: str, requester_ip: str, category: Optional[str] = None
    ) -> list[SearchHit]:
        inst = self.resolve_requester(requester_ip)
        if inst is not None and category is not None:
            rights = self._rights(inst, category)
            if not rights.navigation_browsing:
                raise RightsDenied(f"category {category!r} may not browse")
        hits = self.db.search(query)
        self.events.append(
            AccessEvent(
                timestamp=self.clock(),
                institution=inst.id if inst else NONE_MARK,
                issn=NONE_MARK,
                kind=KIND_SEARCH,
            )
        )
        return hits

    # -- article requests -------------------------------------------------------

    def request_article(self, article_key: str, user: UserContext) -> RequestRecord:
        found = self.db.get_article(article_key)
        if found is None:
            raise ArticleNotFound(article_key)
        summary, article = found
        inst = self.resolve_requester(user.source_ip)
        rights = self._rights(inst, user.category if inst else None)
        plan = plan_delivery(inst, rights, summary.issn, self.consortium)

        if plan.mode == DeliveryMode.UNAVAILABLE:
            self._event_for_plan(inst, summary.issn, plan)
            raise ArticleUnavailable(
                f"no institution of the consortium can supply {article_key}"
            )

        journal = self.consortium.journal(summary.issn)
        meta = ResolveRequest(
            issn=summary.issn,
            volume=summary.volume,
            issue=summary.issue,
            first_page=article.first_page,
            title=article.title,
            editor=journal.editor if journal else "",
        )
        assert inst is not None  # a plan always names an affiliated requester
        record = RequestRecord(
            id=new_id("req"),
            article_key=article_key,
            institution=inst.id,
            plan=plan,
            status=STATUS_DEFERRED,
            created=self.clock(),
            email=user.email,
        )

        from ..docserver.client import DocServerError  # local import to keep layering

        try:
            if plan.mode == DeliveryMode.ELECTRONIC_TO_WORKSTATION:
                client = self._docserver(inst.id)
                client.fetch_document(article_key, meta)
                record.status = STATUS_READY
                record.locator = f"{client.base_url}/documents/{article_key}"
                record.message = "available on your workstation"
            elif plan.mode in (
                DeliveryMode.PRINT_AT_AUTHORIZED_PRINTER,
                DeliveryMode.DIGITALIZE_THEN_PRINT,
            ):
                client = self._docserver(plan.source_institution)
                job = client.create_print_job(
                    article_key,
                    plan.destination.value,
                    plan,
                    inst.id,
                    article.pages,
                    meta if plan.mode == DeliveryMode.PRINT_AT_AUTHORIZED_PRINTER else None,
                )
                record.job_institution = plan.source_institution
                record.job_id = job["id"]
                record.message = (
                    "queued for delivery; you will be advised when the article is available"
                )
            else:  # photocopy by postal mail
                client = self._docserver(plan.source_institution)
                job = client.create_mail_job(
                    article_key,
                    plan,
                    inst.id,
                    plan.destination.value or inst.postal_address,
                    article.pages,
                )
                record.job_institution = plan.source_institution
                record.job_id = job["id"]
                record.message = (
                    "queued for photocopy and postal delivery; you will be advised "
                    "when the article is available"
                )
        except DocServerError as exc:
            raise UpstreamFailure(str(exc)) from exc

        self._event_for_plan(inst, summary.issn, plan)
        with self._requests_lock:
            self._requests[record.id] = record
        return self.request_status(record.id)

    def _event_for_plan(
        self, inst: Optional[Institution], issn: str, plan: DeliveryPlan
    ) -> None:
        if plan.mode == DeliveryMode.ELECTRONIC_TO_WORKSTATION:
            kind = KIND_DOWNLOADED
        else:
            kind = planned_kind(plan.mode.value)
        self.events.append(
            AccessEvent(
                timestamp=self.clock(),
                institution=inst.id if inst else NONE_MARK,
                issn=issn,
                kind=kind,
            )
        )

    def request_status(self, request_id: str) -> RequestRecord:
        with self._requests_lock:
            record = self._requests.get(request_id)
        if record is None:
            raise RequestNotFound(request_id)
        if record.status == STATUS_DEFERRED and record.job_id is not None:
            try:
                job = self._docserver(record.job_institution).job(record.job_id)
            except Exception:
                return record  # job state unknown right now; stay deferred
            if job["state"] == "done":
                record.status = STATUS_READY
                record.message = f"article delivered: {job['detail']}"
                self._notify(record)
        return record

    def _notify(self, record: RequestRecord) -> None:
        if record.notified:
            return
        record.notified = True
        if record.email and self.notification_sink is not None:
            try:
                self.notification_sink.send(
                    record.email,
                    f"Your requested article {record.article_key} is available",
                    record.message + "\n",
                )
            except Exception as exc:  # notification is best-effort
                log.warning("notification for %s failed: %s", record.id, exc)

    # -- alerts ------------------------------------------------------------------

    def create_alert(self, email: str, issns: list[str]) -> AlertSubscription:
        return self.alerts.create(email, issns, clock=self.clock)

    def delete_alert(self, sub_id: str) -> AlertSubscription:
        return self.alerts.deactivate(sub_id)

    def list_alerts(self, email: Optional[str] = None) -> list[AlertSubscription]:
        return self.alerts.list(email=email)

    def run_digest(self, now: Optional[datetime] = None) -> DigestRun:
        return self.digest.run(now)

    # -- administration ------------------------------------------------------------

    def _admin_log(self, admin_id: str, action: str, detail: dict) -> None:
        self.admin_log_path.parent.mkdir(parents=True, exist_ok=True)
        entry = {
            "timestamp": format_instant(self.clock()),
            "admin": admin_id,
            "action": action,
            **detail,
        }
        with self.admin_log_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")

    def admin_add_summary(self, s: PivotSummary, admin_id: str) -> dict:
        """Manual addition runs the exact validate-then-store path ingestion
        uses, so a hand-entered summary cannot bypass coherence control."""
        report = validate(s, self.consortium.journals)
        if report.has_errors:
            raise SchemaViolation(
                "; ".join(f.message for f in report.findings if f.severity.value == "error")
            )
        from ..ingest.adapters import ProviderConfig

        result = self.store.store(s, ProviderConfig(id=s.provider, adapter="", title_filter=None))
        if not result.stored:
            raise SchemaViolation(f"summary {s.key} already stored ({result.reason})")
        record_arrival(self.arrivals_log, s)
        self._admin_log(admin_id, "add-summary", {"key": s.key})
        self.db.refresh()
        return summary_to_dict(s)

    def admin_patch_summary(self, key: str, patch: Mapping, admin_id: str) -> dict:
        s = self.db.get_summary(key)
        if s is None:
            raise ArticleNotFound(key)
        updated = apply_patch(s, patch)
        report = validate(updated, self.consortium.journals)
        if report.has_errors:
            raise SchemaViolation(
                "; ".join(f.message for f in report.findings if f.severity.value == "error")
            )
        self.store.overwrite(updated)
        self._admin_log(admin_id, "patch-summary", {"key": key, "patch": dict(patch)})
        self.db.refresh()
        return summary_to_dict(updated)

    def export_stats(self, start: datetime, end: datetime) -> str:
        return export_stats_csv(self.events, start, end)
