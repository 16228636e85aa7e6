"""Per-subscriber digests of newly arrived summaries.

Each run covers the half-open window (previous run, now]: every active
subscriber gets at most one message listing the summaries that arrived in
the window for titles they follow. The watermark only advances after every
message went out, so a broken mail sink means the next run simply covers
the same window again; a summary key is never digested twice for one
subscriber across successful runs.
"""

from __future__ import annotations

import fcntl
import json
import logging
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Callable, Optional, Protocol

from .ingest.pivot import PivotSummary, parse_summary_key
from .ingest.store import SummaryStore
from .summary.alerts import AlertStore
from .util import format_instant, new_id, parse_instant, utc_now

log = logging.getLogger(__name__)


class SinkUnavailable(RuntimeError):
    pass


class MailSink(Protocol):
    def send(self, recipient: str, subject: str, body: str) -> None: ...


class MemoryMailSink:
    """Test sink; keeps every message for assertions."""

    def __init__(self):
        self.messages: list[tuple[str, str, str]] = []

    def send(self, recipient: str, subject: str, body: str) -> None:
        self.messages.append((recipient, subject, body))


class SpoolMailSink:
    """Writes one file per message into a spool directory."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)

    def send(self, recipient: str, subject: str, body: str) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.directory / f"{new_id('msg')}.msg"
        path.write_text(f"To: {recipient}\nSubject: {subject}\n\n{body}", "utf-8")


class LogMailSink:
    def send(self, recipient: str, subject: str, body: str) -> None:
        log.info("mail to %s: %s\n%s", recipient, subject, body)


def build_sink(kind: str, directory: Optional[Path] = None) -> MailSink:
    if kind == "spool":
        if directory is None:
            raise ValueError("spool sink needs a directory")
        return SpoolMailSink(directory)
    if kind == "log":
        return LogMailSink()
    if kind == "memory":
        return MemoryMailSink()
    raise ValueError(f"unknown mail sink {kind!r}")


@dataclass(frozen=True)
class DigestMessage:
    email: str
    summary_keys: tuple[str, ...]
    body: str


@dataclass(frozen=True)
class DigestRun:
    run_id: str
    window_start: datetime
    window_end: datetime
    messages: tuple[DigestMessage, ...]
    dispatched: datetime


def format_digest(summaries: list[PivotSummary]) -> str:
    """Deterministic plain-text digest body (stable for golden tests)."""
    blocks = []
    for s in sorted(summaries, key=lambda x: x.key):
        lines = [f"{s.journal_title}, vol. {s.volume} no. {s.issue} ({s.cover_date.isoformat()})"]
        for a in s.articles:
            authors = "; ".join(a.authors) if a.authors else "(no authors listed)"
            lines.append(f"  {a.seq}. {a.title} - {authors} - pp. {a.first_page}-{a.last_page}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


class DigestService:
    """Computes and dispatches digest runs over the arrivals log.

    The arrivals log is written by the ingestion pipeline's alert stage:
    one line per newly stored summary with its arrival instant. State is a
    tiny JSON file holding the watermark; an advisory file lock keeps runs
    from overlapping.
    """

    def __init__(
        self,
        arrivals_log: Path,
        store: SummaryStore,
        alerts: AlertStore,
        sink: MailSink,
        state_path: Path,
        clock: Callable[[], datetime] = utc_now,
    ):
        self.arrivals_log = Path(arrivals_log)
        self.store = store
        self.alerts = alerts
        self.sink = sink
        self.state_path = Path(state_path)
        self.clock = clock
        if not self.state_path.exists():
            # bootstrap watermark: nothing before service installation is digested
            self._write_state(self.clock())

    # -- state -----------------------------------------------------------

    def watermark(self) -> datetime:
        return parse_instant(json.loads(self.state_path.read_text("utf-8"))["last_run"])

    def _write_state(self, last_run: datetime) -> None:
        self.state_path.parent.mkdir(parents=True, exist_ok=True)
        self.state_path.write_text(
            json.dumps({"last_run": format_instant(last_run)}), "utf-8"
        )

    def _arrivals_between(self, start: datetime, end: datetime) -> list[dict]:
        if not self.arrivals_log.exists():
            return []
        out = []
        with self.arrivals_log.open(encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                entry = json.loads(line)
                arrival = parse_instant(entry["arrival"])
                if start < arrival <= end:
                    out.append(entry)
        return out

    # -- runs --------------------------------------------------------------

    def run(self, now: Optional[datetime] = None) -> DigestRun:
        now = now or self.clock()
        lock_path = self.state_path.with_suffix(".lock")
        lock_path.parent.mkdir(parents=True, exist_ok=True)
        with lock_path.open("w") as lock_fh:
            fcntl.flock(lock_fh, fcntl.LOCK_EX)
            return self._run_locked(now)

    def _run_locked(self, now: datetime) -> DigestRun:
        start = self.watermark()
        if now < start:
            raise ValueError(f"run instant {now} precedes the watermark {start}")
        arrivals = self._arrivals_between(start, now)
        messages: list[DigestMessage] = []
        loaded: dict[str, PivotSummary] = {}
        for sub in self.alerts.active():
            keys = tuple(a["key"] for a in arrivals if a["issn"] in sub.issns)
            if not keys:
                continue
            summaries = []
            for key in keys:
                if key not in loaded:
                    s = self.store.load_key(*parse_summary_key(key))
                    if s is None:
                        continue  # stored summary vanished; skip, do not fail the run
                    loaded[key] = s
                if key in loaded:
                    summaries.append(loaded[key])
            if not summaries:
                continue
            messages.append(
                DigestMessage(email=sub.email, summary_keys=keys, body=format_digest(summaries))
            )
        subject = f"New summaries through {format_instant(now)}"
        for m in messages:
            try:
                self.sink.send(m.email, subject, m.body)
            except Exception as exc:
                # watermark untouched: the next run re-covers this window
                raise SinkUnavailable(f"mail sink failed for {m.email}: {exc}") from exc
        self._write_state(now)
        return DigestRun(
            run_id=new_id("digest"),
            window_start=start,
            window_end=now,
            messages=tuple(messages),
            dispatched=self.clock(),
        )
