"""The pivot exchange format: one canonical XML document per journal issue.

Every provider feed is converted into this format before anything else
happens; it is the only representation the rest of the system reads or
writes. UTF-8 text, shaped like:

    <summary issn="1000-0003" journal="..." volume="12" issue="3"
             date="2026-05-01" provider="tabs"
             arrival="2026-05-02T08:00:00+00:00">
      <article seq="1">
        <title>...</title>
        <author>...</author>
        <pages first="1" last="12"/>
        <abstract>...</abstract>
      </article>
    </summary>

`author` repeats (possibly absent), `abstract` is optional. Serialization is
deterministic: identical summaries produce identical bytes.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import date, datetime
from typing import Optional
from xml.sax.saxutils import escape, quoteattr

from ..util import format_instant, parse_instant


class SchemaViolation(ValueError):
    """A pivot document (or in-memory summary) breaks the pivot schema; the
    message names the offending element or attribute."""


@dataclass(frozen=True)
class ArticleRef:
    seq: int
    title: str
    authors: tuple[str, ...] = ()
    first_page: int = 1
    last_page: int = 1
    abstract: Optional[str] = None

    def __post_init__(self):
        if self.seq < 1:
            raise SchemaViolation(f"article seq must be positive, got {self.seq}")
        if self.first_page < 1 or self.last_page < self.first_page:
            raise SchemaViolation(
                f"article {self.seq}: bad page range {self.first_page}-{self.last_page}"
            )

    @property
    def pages(self) -> int:
        return self.last_page - self.first_page + 1


@dataclass(frozen=True)
class PivotSummary:
    issn: str
    journal_title: str
    volume: int
    issue: int
    cover_date: date
    provider: str
    arrival: datetime
    articles: tuple[ArticleRef, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.volume < 1 or self.issue < 1:
            raise SchemaViolation(f"volume/issue must be positive: {self.volume}/{self.issue}")
        if not self.articles:
            raise SchemaViolation(f"summary {self.issn} v{self.volume} i{self.issue}: no articles")
        seqs = [a.seq for a in self.articles]
        if any(b <= a for a, b in zip(seqs, seqs[1:])):
            raise SchemaViolation("article seq values must be strictly increasing")

    @property
    def key(self) -> str:
        """Deduplication key; the provider is deliberately not part of it."""
        return summary_key(self.issn, self.volume, self.issue)

    def article(self, seq: int) -> Optional[ArticleRef]:
        for a in self.articles:
            if a.seq == seq:
                return a
        return None

    def article_keys(self) -> list[str]:
        return [article_key(self.issn, self.volume, self.issue, a.seq) for a in self.articles]


def summary_key(issn: str, volume: int, issue: int) -> str:
    return f"{issn}:v{volume}:i{issue}"


def article_key(issn: str, volume: int, issue: int, seq: int) -> str:
    return f"{issn}:v{volume}:i{issue}:a{seq}"


_ARTICLE_KEY_RE = re.compile(r"^(?P<issn>[^:]+):v(?P<volume>\d+):i(?P<issue>\d+):a(?P<seq>\d+)$")
_SUMMARY_KEY_RE = re.compile(r"^(?P<issn>[^:]+):v(?P<volume>\d+):i(?P<issue>\d+)$")


def parse_article_key(key: str) -> tuple[str, int, int, int]:
    m = _ARTICLE_KEY_RE.match(key)
    if not m:
        raise ValueError(f"bad article key {key!r}")
    return (m["issn"], int(m["volume"]), int(m["issue"]), int(m["seq"]))


def parse_summary_key(key: str) -> tuple[str, int, int]:
    m = _SUMMARY_KEY_RE.match(key)
    if not m:
        raise ValueError(f"bad summary key {key!r}")
    return (m["issn"], int(m["volume"]), int(m["issue"]))


# \r would be silently normalized away by XML parsers; keep it as a char ref
# so serialize/parse round-trips byte content exactly.
_TEXT_ESCAPES = {"\r": "&#13;"}


def _elem(text: str) -> str:
    return escape(text, _TEXT_ESCAPES)


def to_pivot_document(s: PivotSummary) -> bytes:
    """Serialize one summary; deterministic byte output for identical input."""
    out = [
        "<summary issn=%s journal=%s volume=%s issue=%s date=%s provider=%s arrival=%s>"
        % (
            quoteattr(s.issn),
            quoteattr(s.journal_title),
            quoteattr(str(s.volume)),
            quoteattr(str(s.issue)),
            quoteattr(s.cover_date.isoformat()),
            quoteattr(s.provider),
            quoteattr(format_instant(s.arrival)),
        )
    ]
    for a in s.articles:
        out.append(f'  <article seq={quoteattr(str(a.seq))}>')
        out.append(f"    <title>{_elem(a.title)}</title>")
        for author in a.authors:
            out.append(f"    <author>{_elem(author)}</author>")
        out.append(
            f'    <pages first={quoteattr(str(a.first_page))} last={quoteattr(str(a.last_page))}/>'
        )
        if a.abstract is not None:
            out.append(f"    <abstract>{_elem(a.abstract)}</abstract>")
        out.append("  </article>")
    out.append("</summary>")
    out.append("")
    return "\n".join(out).encode("utf-8")


def _require_attr(el: ET.Element, name: str) -> str:
    value = el.get(name)
    if value is None:
        raise SchemaViolation(f"<{el.tag}> is missing the {name!r} attribute")
    return value


def _int_attr(el: ET.Element, name: str) -> int:
    raw = _require_attr(el, name)
    try:
        return int(raw)
    except ValueError:
        raise SchemaViolation(f"<{el.tag}> attribute {name!r} is not an integer: {raw!r}") from None


def parse_pivot_document(data: bytes) -> PivotSummary:
    try:
        root = ET.fromstring(data.decode("utf-8"))
    except (ET.ParseError, UnicodeDecodeError) as exc:
        raise SchemaViolation(f"not a well-formed pivot document: {exc}") from None
    if root.tag != "summary":
        raise SchemaViolation(f"root element must be <summary>, got <{root.tag}>")
    try:
        cover = date.fromisoformat(_require_attr(root, "date"))
    except ValueError:
        raise SchemaViolation("<summary> attribute 'date' is not a calendar date") from None
    try:
        arrival = parse_instant(_require_attr(root, "arrival"))
    except ValueError:
        raise SchemaViolation("<summary> attribute 'arrival' is not an instant") from None

    articles = []
    for el in root:
        if el.tag != "article":
            raise SchemaViolation(f"unexpected element <{el.tag}> under <summary>")
        title_el = el.find("title")
        if title_el is None:
            raise SchemaViolation(f"<article seq={el.get('seq')!r}> is missing <title>")
        pages_el = el.find("pages")
        if pages_el is None:
            raise SchemaViolation(f"<article seq={el.get('seq')!r}> is missing <pages>")
        abstract_el = el.find("abstract")
        articles.append(
            ArticleRef(
                seq=_int_attr(el, "seq"),
                title=title_el.text or "",
                authors=tuple((a.text or "") for a in el.findall("author")),
                first_page=_int_attr(pages_el, "first"),
                last_page=_int_attr(pages_el, "last"),
                abstract=abstract_el.text or "" if abstract_el is not None else None,
            )
        )
    return PivotSummary(
        issn=_require_attr(root, "issn"),
        journal_title=_require_attr(root, "journal"),
        volume=_int_attr(root, "volume"),
        issue=_int_attr(root, "issue"),
        cover_date=cover,
        provider=_require_attr(root, "provider"),
        arrival=arrival,
        articles=tuple(articles),
    )
