"""Token index over article titles, author names, and journal titles.

Abstracts are deliberately not indexed: queries match only the fields the
catalogue can vouch for. Matching is conjunctive (every query token must
appear); the score is the total occurrence count of the query tokens in the
indexed fields, and ties order by article key so results are stable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

# unicode-aware alphanumeric runs; underscore is a separator like any other
# punctuation
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class SearchHit:
    article_key: str
    journal_title: str
    article_title: str
    authors: tuple[str, ...]
    score: int

    def to_dict(self) -> dict:
        return {
            "article_key": self.article_key,
            "journal_title": self.journal_title,
            "article_title": self.article_title,
            "authors": list(self.authors),
            "score": self.score,
        }


class SearchIndex:
    def __init__(self):
        self._postings: dict[str, dict[str, int]] = {}
        self._meta: dict[str, tuple[str, str, tuple[str, ...]]] = {}

    def add(
        self, article_key: str, journal_title: str, article_title: str, authors: tuple[str, ...]
    ) -> None:
        self._meta[article_key] = (journal_title, article_title, authors)
        tokens = tokenize(article_title) + tokenize(journal_title)
        for author in authors:
            tokens.extend(tokenize(author))
        for tok in tokens:
            bucket = self._postings.setdefault(tok, {})
            bucket[article_key] = bucket.get(article_key, 0) + 1

    def __len__(self) -> int:
        return len(self._meta)

    def search(self, query: str) -> list[SearchHit]:
        tokens = list(dict.fromkeys(tokenize(query)))  # dedupe, keep order
        if not tokens:
            return []
        candidates: set[str] | None = None
        for tok in tokens:
            keys = set(self._postings.get(tok, ()))
            candidates = keys if candidates is None else candidates & keys
            if not candidates:
                return []
        hits = []
        for key in candidates or ():
            journal_title, article_title, authors = self._meta[key]
            score = sum(self._postings[tok][key] for tok in tokens)
            hits.append(SearchHit(key, journal_title, article_title, authors, score))
        hits.sort(key=lambda h: (-h.score, h.article_key))
        return hits
