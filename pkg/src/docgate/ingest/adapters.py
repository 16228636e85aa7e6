"""Provider feed adapters.

Each provider delivers issue summaries in its own format, so each gets its
own adapter whose single job is to turn raw feed bytes into pivot summaries.
Two formats are supported out of the box:

``swetslike`` - tab-delimited, one record per line:

    ISSUE<TAB>issn<TAB>journal title<TAB>volume<TAB>issue<TAB>YYYY-MM-DD
    ARTICLE<TAB>title<TAB>authors (; separated, may be empty)<TAB>first<TAB>last[<TAB>abstract]

  ARTICLE lines belong to the most recent ISSUE line; article seq numbers
  are assigned 1-based in file order. Blank lines are ignored.

``editoralert`` - line-tagged blocks, the shape of an editor's mail alert:

    JOURNAL: title          starts a new issue
    ISSN: 1000-0003
    VOLUME: 12
    ISSUE: 3
    DATE: 2026-05-01

    TITLE: article title    starts a new article
    AUTHORS: a; b           optional
    PAGES: 1-12
    ABSTRACT: text          optional

Parsing is all-or-nothing per file: one malformed line rejects the whole
batch (the raw file stays in the archive for correction and replay).
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, datetime
from typing import Callable, Optional

from ..util import utc_now
from .pivot import ArticleRef, PivotSummary, SchemaViolation


class AdapterUnknown(LookupError):
    pass


class MalformedFeed(ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


@dataclass(frozen=True)
class ProviderConfig:
    """Provider wiring: which adapter parses its feeds and which journal
    titles it is allowed to feed into the store (None means accept-all)."""

    id: str
    adapter: str
    title_filter: Optional[frozenset[str]] = None

    def admits(self, issn: str) -> bool:
        return self.title_filter is None or issn in self.title_filter


def _split_authors(raw: str) -> tuple[str, ...]:
    return tuple(a.strip() for a in raw.split(";") if a.strip())


def _parse_int(raw: str, line: int, what: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise MalformedFeed(line, f"{what} is not an integer: {raw!r}") from None


def _parse_date(raw: str, line: int) -> date:
    try:
        return date.fromisoformat(raw)
    except ValueError:
        raise MalformedFeed(line, f"bad date {raw!r} (want YYYY-MM-DD)") from None


def parse_swetslike(text: str, provider: str, arrival: datetime) -> list[PivotSummary]:
    issues: list[dict] = []
    current: Optional[dict] = None
    for n, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        kind = fields[0]
        if kind == "ISSUE":
            if len(fields) != 6:
                raise MalformedFeed(n, f"ISSUE wants 6 fields, got {len(fields)}")
            current = {
                "issn": fields[1],
                "journal": fields[2],
                "volume": _parse_int(fields[3], n, "volume"),
                "issue": _parse_int(fields[4], n, "issue"),
                "date": _parse_date(fields[5], n),
                "articles": [],
            }
            issues.append(current)
        elif kind == "ARTICLE":
            if current is None:
                raise MalformedFeed(n, "ARTICLE before any ISSUE")
            if len(fields) not in (5, 6):
                raise MalformedFeed(n, f"ARTICLE wants 5 or 6 fields, got {len(fields)}")
            current["articles"].append(
                {
                    "line": n,
                    "title": fields[1],
                    "authors": _split_authors(fields[2]),
                    "first": _parse_int(fields[3], n, "first page"),
                    "last": _parse_int(fields[4], n, "last page"),
                    "abstract": fields[5] if len(fields) == 6 else None,
                }
            )
        else:
            raise MalformedFeed(n, f"unknown record kind {kind!r}")
    if not issues:
        raise MalformedFeed(0, "feed contains no issues")
    return [_build_summary(rec, provider, arrival) for rec in issues]


def parse_editoralert(text: str, provider: str, arrival: datetime) -> list[PivotSummary]:
    issues: list[dict] = []
    current: Optional[dict] = None
    article: Optional[dict] = None
    for n, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if ":" not in line:
            raise MalformedFeed(n, f"expected 'TAG: value', got {line!r}")
        tag, _, value = line.partition(":")
        tag = tag.strip()
        value = value.strip()
        if tag == "JOURNAL":
            current = {"journal": value, "articles": []}
            article = None
            issues.append(current)
        elif current is None:
            raise MalformedFeed(n, f"{tag} before any JOURNAL")
        elif tag == "ISSN":
            current["issn"] = value
        elif tag == "VOLUME":
            current["volume"] = _parse_int(value, n, "volume")
        elif tag == "ISSUE":
            current["issue"] = _parse_int(value, n, "issue")
        elif tag == "DATE":
            current["date"] = _parse_date(value, n)
        elif tag == "TITLE":
            article = {"line": n, "title": value, "authors": (), "abstract": None}
            current["articles"].append(article)
        elif article is None:
            raise MalformedFeed(n, f"{tag} before any TITLE")
        elif tag == "AUTHORS":
            article["authors"] = _split_authors(value)
        elif tag == "PAGES":
            first, sep, last = value.partition("-")
            if not sep:
                raise MalformedFeed(n, f"PAGES wants 'first-last', got {value!r}")
            article["first"] = _parse_int(first.strip(), n, "first page")
            article["last"] = _parse_int(last.strip(), n, "last page")
        elif tag == "ABSTRACT":
            article["abstract"] = value
        else:
            raise MalformedFeed(n, f"unknown tag {tag!r}")
    if not issues:
        raise MalformedFeed(0, "feed contains no issues")
    for rec in issues:
        for a in rec["articles"]:
            if "first" not in a:
                raise MalformedFeed(a["line"], f"article {a['title']!r} has no PAGES line")
        for field in ("issn", "volume", "issue", "date"):
            if field not in rec:
                raise MalformedFeed(0, f"issue {rec['journal']!r} is missing {field.upper()}")
    return [_build_summary(rec, provider, arrival) for rec in issues]


def _build_summary(rec: dict, provider: str, arrival: datetime) -> PivotSummary:
    try:
        return PivotSummary(
            issn=rec["issn"],
            journal_title=rec["journal"],
            volume=rec["volume"],
            issue=rec["issue"],
            cover_date=rec["date"],
            provider=provider,
            arrival=arrival,
            articles=tuple(
                ArticleRef(
                    seq=i,
                    title=a["title"],
                    authors=a["authors"],
                    first_page=a["first"],
                    last_page=a["last"],
                    abstract=a["abstract"],
                )
                for i, a in enumerate(rec["articles"], start=1)
            ),
        )
    except SchemaViolation as exc:
        raise MalformedFeed(0, str(exc)) from None


Adapter = Callable[[str, str, datetime], list[PivotSummary]]

ADAPTERS: dict[str, Adapter] = {
    "swetslike": parse_swetslike,
    "editoralert": parse_editoralert,
}


def parse_feed(
    raw: bytes, provider: ProviderConfig, arrival: Optional[datetime] = None
) -> list[PivotSummary]:
    """Decode and parse one feed file into pivot summaries.

    Character data is decoded as UTF-8 so author and title text in any
    language survives unchanged. The whole file is rejected on the first
    error.
    """
    adapter = ADAPTERS.get(provider.adapter)
    if adapter is None:
        raise AdapterUnknown(f"no adapter named {provider.adapter!r}")
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedFeed(0, f"feed is not valid UTF-8: {exc}") from None
    return adapter(text, provider.id, arrival or utc_now())
