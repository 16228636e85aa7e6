from __future__ import annotations

from datetime import date, datetime, timezone

from docgate.ingest.pivot import ArticleRef, PivotSummary
from docgate.ingest.validation import Severity, validate
from docgate.policy import Journal

JOURNALS = {
    "1000-0003": Journal(
        issn="1000-0003",
        title="Annals of Network Routing",
        domains=("exact-sciences",),
        editor="editor-x",
    )
}


def summary(**overrides):
    defaults = dict(
        issn="1000-0003",
        journal_title="Annals of Network Routing",
        volume=1,
        issue=1,
        cover_date=date(2026, 1, 1),
        provider="tabs",
        arrival=datetime(2026, 1, 2, tzinfo=timezone.utc),
        articles=(
            ArticleRef(seq=1, title="T", authors=("A",), first_page=1, last_page=2, abstract="x"),
        ),
    )
    defaults.update(overrides)
    return PivotSummary(**defaults)


def codes(report, severity=None):
    return [f.code for f in report.findings if severity is None or f.severity == severity]


def test_clean_summary_has_empty_report():
    report = validate(summary(), JOURNALS)
    assert report.findings == []
    assert not report.has_errors


def test_wrong_check_digit_is_error():
    # 1234-567 carries check character 9; 1234-5678 is therefore invalid
    report = validate(summary(issn="1234-5678", journal_title="X"), JOURNALS)
    assert "issn-check-digit" in codes(report, Severity.ERROR)


def test_unknown_issn_is_error():
    report = validate(summary(issn="2000-0006"), JOURNALS)
    assert "issn-unknown" in codes(report, Severity.ERROR)


def test_title_mismatch_is_error():
    report = validate(summary(journal_title="Annals of Networking"), JOURNALS)
    assert codes(report, Severity.ERROR) == ["title-mismatch"]


def test_title_comparison_is_case_insensitive():
    report = validate(summary(journal_title="ANNALS OF NETWORK ROUTING"), JOURNALS)
    assert not report.has_errors


def test_missing_abstract_and_authors_warn_only():
    report = validate(
        summary(articles=(ArticleRef(seq=1, title="T", first_page=1, last_page=2),)),
        JOURNALS,
    )
    assert not report.has_errors
    assert set(codes(report, Severity.WARNING)) == {"missing-abstract", "no-authors"}


def test_article_titles_and_authors_never_cross_checked():
    # nothing to compare them against: arbitrary article text passes
    report = validate(
        summary(
            articles=(
                ArticleRef(seq=1, title="Entirely Unrelated Words", authors=("Z. Zed",),
                           first_page=1, last_page=2, abstract="a"),
            )
        ),
        JOURNALS,
    )
    assert not report.has_errors
