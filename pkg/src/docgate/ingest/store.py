"""File-hierarchy storage for accepted summaries plus the raw-feed archive.

Store layout:    store/<issn>/<year>/<volume>-<issue>.pivot
Archive layout:  archive/<provider>/<YYYY-MM-DD>/<seq>          raw feed bytes
                 archive/<provider>/<YYYY-MM-DD>/<seq>.meta     received instant

The archive keeps every byte every provider ever sent, before anything else
touches it, so feeds can be replayed at any moment under a new
configuration. Stored summaries are never overwritten: the first arrival of
a (issn, volume, issue) key wins, whoever delivered it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterator, Optional

from ..util import atomic_write_bytes, format_instant, parse_instant
from .adapters import ProviderConfig
from .pivot import PivotSummary, parse_pivot_document, to_pivot_document


class StorageUnavailable(OSError):
    pass


@dataclass(frozen=True)
class StoreResult:
    status: str  # "stored" | "skipped"
    path: Optional[Path] = None
    reason: Optional[str] = None  # "filtered" | "duplicate"

    @property
    def stored(self) -> bool:
        return self.status == "stored"


@dataclass(frozen=True)
class ArchivedFeed:
    path: Path
    provider: str
    received: datetime

    def read(self) -> bytes:
        return self.path.read_bytes()


class SummaryStore:
    def __init__(self, root: Path):
        self.root = Path(root)
        self.store_dir = self.root / "store"
        self.archive_dir = self.root / "archive"

    # -- summary store -------------------------------------------------

    def path_for(self, s: PivotSummary) -> Path:
        year = s.cover_date.year
        return self.store_dir / s.issn / str(year) / f"{s.volume}-{s.issue}.pivot"

    def find_key(self, issn: str, volume: int, issue: int) -> Optional[Path]:
        # dedup is key-based, not path-based: the same issue under a
        # different cover year is still the same issue
        base = self.store_dir / issn
        if not base.is_dir():
            return None
        hits = sorted(base.glob(f"*/{volume}-{issue}.pivot"))
        return hits[0] if hits else None

    def store(self, s: PivotSummary, cfg: ProviderConfig) -> StoreResult:
        if not cfg.admits(s.issn):
            return StoreResult("skipped", reason="filtered")
        existing = self.find_key(s.issn, s.volume, s.issue)
        if existing is not None:
            return StoreResult("skipped", path=existing, reason="duplicate")
        path = self.path_for(s)
        try:
            atomic_write_bytes(path, to_pivot_document(s))
        except OSError as exc:
            raise StorageUnavailable(f"cannot write {path}: {exc}") from exc
        return StoreResult("stored", path=path)

    def overwrite(self, s: PivotSummary) -> Path:
        """Administrative replacement of an already-stored summary."""
        existing = self.find_key(s.issn, s.volume, s.issue)
        path = existing if existing is not None else self.path_for(s)
        try:
            atomic_write_bytes(path, to_pivot_document(s))
        except OSError as exc:
            raise StorageUnavailable(f"cannot write {path}: {exc}") from exc
        return path

    def load(self, path: Path) -> PivotSummary:
        return parse_pivot_document(Path(path).read_bytes())

    def load_key(self, issn: str, volume: int, issue: int) -> Optional[PivotSummary]:
        path = self.find_key(issn, volume, issue)
        return self.load(path) if path else None

    def iter_paths(self) -> Iterator[Path]:
        if self.store_dir.is_dir():
            yield from sorted(self.store_dir.glob("*/*/*.pivot"))

    def iter_summaries(self) -> Iterator[PivotSummary]:
        for path in self.iter_paths():
            yield self.load(path)

    # -- raw archive ----------------------------------------------------

    def archive_raw(self, raw: bytes, provider: str, received: datetime) -> Path:
        day_dir = self.archive_dir / provider / received.date().isoformat()
        try:
            day_dir.mkdir(parents=True, exist_ok=True)
            seq = 1 + max(
                (int(p.name) for p in day_dir.iterdir() if p.name.isdigit()), default=0
            )
            path = day_dir / str(seq)
            atomic_write_bytes(path, raw)
            meta = {"provider": provider, "received": format_instant(received)}
            atomic_write_bytes(
                day_dir / f"{seq}.meta", json.dumps(meta, sort_keys=True).encode("utf-8")
            )
        except OSError as exc:
            raise StorageUnavailable(f"cannot archive into {day_dir}: {exc}") from exc
        return path

    def iter_archive(self, provider: str) -> Iterator[ArchivedFeed]:
        """Archived feeds for one provider, oldest first."""
        base = self.archive_dir / provider
        if not base.is_dir():
            return
        for day_dir in sorted(base.iterdir()):
            if not day_dir.is_dir():
                continue
            for path in sorted(
                (p for p in day_dir.iterdir() if p.name.isdigit()),
                key=lambda p: int(p.name),
            ):
                meta_path = path.with_name(path.name + ".meta")
                meta = json.loads(meta_path.read_text("utf-8"))
                yield ArchivedFeed(
                    path=path, provider=meta["provider"], received=parse_instant(meta["received"])
                )
