"""Anonymous usage trace and its tabular export.

Events carry the institution (resolved from the source address), the
journal, and what happened; never who. The export aggregates to
(institution, issn, kind, count) rows so documentation managers can pull
the raw numbers into a spreadsheet.
"""

from __future__ import annotations

import csv
import io
import json
import threading
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Optional

from ..util import format_instant, parse_instant

KIND_BROWSE = "browse"
KIND_SEARCH = "search"
KIND_REQUEST_PLANNED = "request-planned"  # suffixed with :<mode>
KIND_DOWNLOADED = "downloaded"

# placeholder for "no institution" / "no journal" columns
NONE_MARK = "-"


class InvalidRange(ValueError):
    pass


@dataclass(frozen=True)
class AccessEvent:
    timestamp: datetime
    institution: str
    issn: str
    kind: str

    def to_dict(self) -> dict:
        return {
            "timestamp": format_instant(self.timestamp),
            "institution": self.institution,
            "issn": self.issn,
            "kind": self.kind,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AccessEvent":
        return cls(parse_instant(d["timestamp"]), d["institution"], d["issn"], d["kind"])


def planned_kind(mode: str) -> str:
    return f"{KIND_REQUEST_PLANNED}:{mode}"


class EventLog:
    """Append-only event log, one JSON object per line; appends are
    serialized behind a lock so handlers may log concurrently."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def append(self, event: AccessEvent) -> None:
        line = json.dumps(event.to_dict(), sort_keys=True)
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")

    def read(
        self, start: Optional[datetime] = None, end: Optional[datetime] = None
    ) -> list[AccessEvent]:
        """Events with start <= timestamp < end."""
        if not self.path.exists():
            return []
        out = []
        with self.path.open(encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                ev = AccessEvent.from_dict(json.loads(line))
                if start is not None and ev.timestamp < start:
                    continue
                if end is not None and ev.timestamp >= end:
                    continue
                out.append(ev)
        return out


def export_stats_csv(
    log: EventLog, start: datetime, end: datetime
) -> str:
    """CSV over [start, end): header then one row per
    (institution, issn, kind) with its count. No user-identifying column
    exists anywhere in the log, so none can leak here."""
    if end < start:
        raise InvalidRange(f"export range ends before it starts: {start} .. {end}")
    counts: dict[tuple[str, str, str], int] = {}
    for ev in log.read(start, end):
        key = (ev.institution, ev.issn, ev.kind)
        counts[key] = counts.get(key, 0) + 1
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["institution", "issn", "kind", "count"])
    for (inst, issn_val, kind), n in sorted(counts.items()):
        writer.writerow([inst, issn_val, kind, n])
    return buf.getvalue()
