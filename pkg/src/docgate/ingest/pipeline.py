"""The ingestion pipeline and its service-module registry.

Processing of incoming summaries is split into pluggable service modules
grouped in three stages that always run in the same order:

    Control  -> coherence checks; an error finding blocks storage
    Storage  -> exactly one active module writes accepted summaries
    Alert    -> post-storage hooks (arrival logging for the digest service)

New modules register by name through the registry; the pipeline itself never
changes when one is added. Every incoming file is archived before any other
processing, so a crash mid-batch loses nothing and any batch can be replayed
later under a new configuration.
"""

from __future__ import annotations

import fcntl
import json
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence

from ..policy import Journal
from ..util import format_instant, utc_now
from .adapters import MalformedFeed, ProviderConfig, parse_feed
from .pivot import PivotSummary
from .store import StoreResult, SummaryStore
from .validation import ValidationReport, validate


class Stage(str, Enum):
    CONTROL = "control"
    STORAGE = "storage"
    ALERT = "alert"


STAGE_ORDER = (Stage.CONTROL, Stage.STORAGE, Stage.ALERT)


class DuplicateModuleName(ValueError):
    pass


class RegistryMisconfigured(RuntimeError):
    pass


@dataclass(frozen=True)
class ModuleEntry:
    name: str
    stage: Stage
    fn: Callable


class ServiceModuleRegistry:
    def __init__(self):
        self._entries: list[ModuleEntry] = []

    def register(self, name: str, stage: Stage, fn: Callable) -> None:
        if any(e.name == name for e in self._entries):
            raise DuplicateModuleName(name)
        self._entries.append(ModuleEntry(name, Stage(stage), fn))

    def modules(self, stage: Stage) -> list[ModuleEntry]:
        return [e for e in self._entries if e.stage == stage]

    def check(self) -> None:
        storage = self.modules(Stage.STORAGE)
        if len(storage) != 1:
            raise RegistryMisconfigured(
                f"exactly one storage module must be active, found {len(storage)}"
            )


@dataclass
class SummaryOutcome:
    key: str
    report: Optional[ValidationReport] = None
    store: Optional[StoreResult] = None

    @property
    def rejected(self) -> bool:
        return self.report is not None and self.report.has_errors


@dataclass
class FileOutcome:
    source: str
    archive_path: Optional[Path] = None
    error: Optional[str] = None
    summaries: list[SummaryOutcome] = field(default_factory=list)


@dataclass
class PipelineReport:
    provider: str
    files: list[FileOutcome] = field(default_factory=list)
    trace: list[tuple] = field(default_factory=list)

    def counts(self) -> dict[str, int]:
        c = {
            "files": len(self.files),
            "parse_failures": sum(1 for f in self.files if f.error),
            "rejected": 0,
            "stored": 0,
            "skipped_duplicate": 0,
            "skipped_filtered": 0,
        }
        for f in self.files:
            for s in f.summaries:
                if s.rejected:
                    c["rejected"] += 1
                elif s.store is not None and s.store.stored:
                    c["stored"] += 1
                elif s.store is not None:
                    c[f"skipped_{s.store.reason}"] += 1
        return c

    def one_line(self) -> str:
        return " ".join(f"{k}={v}" for k, v in self.counts().items())


class IngestPipeline:
    """Runs registered service modules over feed batches.

    Module contracts (all receive the parsed summary, the provider config,
    and this pipeline):
      control:  fn(summary, cfg, pipeline) -> ValidationReport
      storage:  fn(summary, cfg, pipeline) -> StoreResult
      alert:    fn(summary, store_result, cfg, pipeline) -> None, stored keys only
    """

    def __init__(
        self,
        store: SummaryStore,
        journals: Mapping[str, Journal],
        registry: Optional[ServiceModuleRegistry] = None,
        arrivals_log: Optional[Path] = None,
    ):
        self.store = store
        self.journals = journals
        self.arrivals_log = arrivals_log
        self.registry = registry or default_registry(self)

    # -- batch execution -------------------------------------------------

    @contextmanager
    def _exclusive_writer(self):
        # one batch at a time over store and archive, across processes
        lock_path = self.store.root / "ingest.lock"
        lock_path.parent.mkdir(parents=True, exist_ok=True)
        with lock_path.open("w") as fh:
            fcntl.flock(fh, fcntl.LOCK_EX)
            yield

    def run_batch(
        self,
        files: Sequence[Path],
        cfg: ProviderConfig,
        clock: Callable[[], datetime] = utc_now,
    ) -> PipelineReport:
        self.registry.check()
        report = PipelineReport(provider=cfg.id)
        with self._exclusive_writer():
            for path in files:
                path = Path(path)
                raw = path.read_bytes()
                received = clock()
                outcome = FileOutcome(source=str(path))
                report.files.append(outcome)
                # archive strictly before parse/store: a crash after this
                # point loses no provider data
                outcome.archive_path = self.store.archive_raw(raw, cfg.id, received)
                report.trace.append(("archive", str(path)))
                self._ingest_raw(raw, cfg, received, outcome, report)
        return report

    def reprocess(self, cfg: ProviderConfig) -> PipelineReport:
        """Replay every archived feed of a provider through the current
        stages; already-stored keys are left untouched, per-file parse
        errors are reported without stopping the replay."""
        self.registry.check()
        report = PipelineReport(provider=cfg.id)
        with self._exclusive_writer():
            for archived in self.store.iter_archive(cfg.id):
                outcome = FileOutcome(source=str(archived.path), archive_path=archived.path)
                report.files.append(outcome)
                report.trace.append(("replay", str(archived.path)))
                self._ingest_raw(archived.read(), cfg, archived.received, outcome, report)
        return report

    def _ingest_raw(
        self,
        raw: bytes,
        cfg: ProviderConfig,
        received: datetime,
        outcome: FileOutcome,
        report: PipelineReport,
    ) -> None:
        try:
            summaries = parse_feed(raw, cfg, arrival=received)
        except MalformedFeed as exc:
            outcome.error = str(exc)
            report.trace.append(("parse-error", outcome.source, str(exc)))
            return
        report.trace.append(("parse", outcome.source, len(summaries)))
        for s in summaries:
            so = SummaryOutcome(key=s.key)
            outcome.summaries.append(so)
            for entry in self.registry.modules(Stage.CONTROL):
                result = entry.fn(s, cfg, self)
                report.trace.append(("control", entry.name, s.key))
                if isinstance(result, ValidationReport):
                    if so.report is None:
                        so.report = result
                    else:
                        so.report.findings.extend(result.findings)
            if so.rejected:
                report.trace.append(("reject", s.key))
                continue
            storage = self.registry.modules(Stage.STORAGE)[0]
            so.store = storage.fn(s, cfg, self)
            report.trace.append(("store", s.key, so.store.status, so.store.reason))
            if so.store.stored:
                for entry in self.registry.modules(Stage.ALERT):
                    entry.fn(s, so.store, cfg, self)
                    report.trace.append(("alert", entry.name, s.key))


# -- default modules -----------------------------------------------------


def _control_validate(
    s: PivotSummary, cfg: ProviderConfig, pipeline: IngestPipeline
) -> ValidationReport:
    return validate(s, pipeline.journals)


def _storage_store(
    s: PivotSummary, cfg: ProviderConfig, pipeline: IngestPipeline
) -> StoreResult:
    # provider admission filter is part of storage, not parsing: everything
    # is archived either way
    return pipeline.store.store(s, cfg)


def record_arrival(arrivals_log: Path, s: PivotSummary) -> None:
    """Append one line to the arrivals log; the digest service reads it to
    find what arrived inside a run window."""
    entry = {
        "key": s.key,
        "issn": s.issn,
        "arrival": format_instant(s.arrival),
        "journal": s.journal_title,
    }
    arrivals_log.parent.mkdir(parents=True, exist_ok=True)
    with arrivals_log.open("a", encoding="utf-8") as fh:
        fh.write(json.dumps(entry, sort_keys=True) + "\n")


def _alert_record_arrival(
    s: PivotSummary, result: StoreResult, cfg: ProviderConfig, pipeline: IngestPipeline
) -> None:
    if pipeline.arrivals_log is None:
        return
    record_arrival(pipeline.arrivals_log, s)


def default_registry(pipeline: IngestPipeline) -> ServiceModuleRegistry:
    reg = ServiceModuleRegistry()
    reg.register("validate", Stage.CONTROL, _control_validate)
    reg.register("store", Stage.STORAGE, _storage_store)
    reg.register("arrivals-log", Stage.ALERT, _alert_record_arrival)
    return reg
