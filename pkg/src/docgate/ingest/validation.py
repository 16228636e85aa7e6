"""Coherence control for incoming summaries.

Checks what a registry can check: the ISSN must be known and self-consistent
and the journal title must agree with the registered one. Article titles and
author names have no reference to compare against, so they are never
cross-checked; gaps there (missing abstract, no authors) are only warnings
for the documentalists to chase.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

from .. import issn as issn_mod
from ..policy import Journal
from .pivot import PivotSummary


class Severity(str, Enum):
    WARNING = "warning"
    ERROR = "error"


@dataclass(frozen=True)
class Finding:
    severity: Severity
    code: str
    message: str


@dataclass
class ValidationReport:
    summary_key: str
    findings: list[Finding] = field(default_factory=list)

    @property
    def has_errors(self) -> bool:
        return any(f.severity == Severity.ERROR for f in self.findings)

    def add(self, severity: Severity, code: str, message: str) -> None:
        self.findings.append(Finding(severity, code, message))


def validate(s: PivotSummary, journals: Mapping[str, Journal]) -> ValidationReport:
    report = ValidationReport(summary_key=s.key)
    if not issn_mod.is_well_formed(s.issn):
        report.add(Severity.ERROR, "issn-malformed", f"{s.issn!r} is not NNNN-NNNC")
    elif not issn_mod.is_valid(s.issn):
        report.add(
            Severity.ERROR,
            "issn-check-digit",
            f"{s.issn} fails the mod-11 check",
        )
    journal = journals.get(s.issn)
    if journal is None:
        report.add(Severity.ERROR, "issn-unknown", f"{s.issn} is not a registered journal")
    elif s.journal_title.strip().lower() != journal.title.strip().lower():
        report.add(
            Severity.ERROR,
            "title-mismatch",
            f"feed says {s.journal_title!r}, registry says {journal.title!r}",
        )
    for a in s.articles:
        if a.abstract is None:
            report.add(Severity.WARNING, "missing-abstract", f"article {a.seq} has no abstract")
        if not a.authors:
            report.add(Severity.WARNING, "no-authors", f"article {a.seq} lists no authors")
    return report
