"""Read-side view over the summary store.

The store's file hierarchy is the database; this class keeps an in-memory
mirror plus the search index, refreshed lazily by re-scanning the tree.
Writers (ingestion batches, admin edits) go through the store's atomic
file writes, so a refresh only ever sees whole documents.
"""

from __future__ import annotations

import threading
from typing import Mapping, Optional

from ..ingest.pivot import ArticleRef, PivotSummary, parse_article_key, summary_key
from ..ingest.store import SummaryStore
from ..policy import Journal
from .search import SearchHit, SearchIndex


class SummaryDatabase:
    def __init__(self, store: SummaryStore, journals: Mapping[str, Journal]):
        self.store = store
        self.journals = journals
        self._lock = threading.Lock()
        self._mtimes: dict[str, tuple[int, int]] = {}
        self._by_key: dict[str, PivotSummary] = {}
        self._index = SearchIndex()

    def refresh(self) -> None:
        """Re-scan the store tree; reload anything added, changed, or removed."""
        with self._lock:
            seen: dict[str, tuple[int, int]] = {}
            for path in self.store.iter_paths():
                stat = path.stat()
                seen[str(path)] = (stat.st_mtime_ns, stat.st_size)
            if seen == self._mtimes:
                return
            self._mtimes = seen
            self._by_key = {}
            for path in self.store.iter_paths():
                s = self.store.load(path)
                self._by_key[s.key] = s
            index = SearchIndex()
            for s in self._by_key.values():
                journal = self.journals.get(s.issn)
                journal_title = journal.title if journal else s.journal_title
                for key in s.article_keys():
                    a = s.article(parse_article_key(key)[3])
                    assert a is not None
                    index.add(key, journal_title, a.title, a.authors)
            self._index = index

    # -- lookups ---------------------------------------------------------

    def summaries(self) -> list[PivotSummary]:
        self.refresh()
        return sorted(self._by_key.values(), key=lambda s: s.key)

    def get_summary(self, key: str) -> Optional[PivotSummary]:
        self.refresh()
        return self._by_key.get(key)

    def get_article(self, art_key: str) -> Optional[tuple[PivotSummary, ArticleRef]]:
        issn, volume, issue, seq = parse_article_key(art_key)
        s = self.get_summary(summary_key(issn, volume, issue))
        if s is None:
            return None
        a = s.article(seq)
        if a is None:
            return None
        return s, a

    def issues_for(self, issn: str) -> list[PivotSummary]:
        self.refresh()
        issues = [s for s in self._by_key.values() if s.issn == issn]
        issues.sort(key=lambda s: (s.volume, s.issue))
        return issues

    def search(self, query: str) -> list[SearchHit]:
        self.refresh()
        return self._index.search(query)
