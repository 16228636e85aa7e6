from __future__ import annotations

import logging
from datetime import date, datetime, timezone

import pytest
import requests

from docgate.binder import (
    BinderService,
    ListingResolver,
    NoResolver,
    NotFoundAtEditor,
    ResolveRequest,
    TemplateResolver,
    build_binder_service,
)
from docgate.binder.mocksites import EditorSiteServer, build_editor_tree, document_bytes
from docgate.ingest.pivot import ArticleRef, PivotSummary


def make_summary(issn, volume, issue, articles):
    return PivotSummary(
        issn=issn,
        journal_title="J",
        volume=volume,
        issue=issue,
        cover_date=date(2026, 3, 1),
        provider="tabs",
        arrival=datetime(2026, 6, 1, tzinfo=timezone.utc),
        articles=articles,
    )


@pytest.fixture(scope="module")
def editor_site(tmp_path_factory):
    root = tmp_path_factory.mktemp("editor")
    build_editor_tree(
        root,
        [
            make_summary(
                "1000-0003",
                12,
                1,
                (
                    ArticleRef(seq=1, title="Adaptive Routing in Overlay Networks",
                               authors=("R. Smith",), first_page=1, last_page=18),
                    ArticleRef(seq=2, title="Consensus Under Partition",
                               authors=("M. Duval",), first_page=19, last_page=34),
                ),
            )
        ],
    )
    server = EditorSiteServer(root).start()
    yield server
    server.stop()


def req(first_page=1, title="Adaptive Routing in Overlay Networks", editor="editor-x"):
    return ResolveRequest(
        issn="1000-0003", volume=12, issue=1, first_page=first_page, title=title, editor=editor
    )


def test_template_resolver_expands_and_probes(editor_site):
    service = BinderService()
    service.register_resolver(
        "editor-x", TemplateResolver(editor_site.url + "/{issn}/{volume}/{first_page}.pdf")
    )
    result = service.resolve(req())
    assert result.url == f"{editor_site.url}/1000-0003/12/1.pdf"
    assert result.resolver == "editor-x"
    assert result.elapsed >= 0
    # the probed URL really serves the document
    assert requests.get(result.url, timeout=5).content == document_bytes("1000-0003", 12, 1, 1)


def test_listing_resolver_scrapes_anchor(editor_site):
    service = BinderService()
    service.register_resolver(
        "editor-y", ListingResolver(editor_site.url + "/{issn}/index.html")
    )
    result = service.resolve(req(first_page=19, title="Consensus Under Partition", editor="editor-y"))
    assert result.url == f"{editor_site.url}/1000-0003/12/19.pdf"


def test_listing_resolver_title_not_on_page(editor_site):
    service = BinderService()
    service.register_resolver(
        "editor-y", ListingResolver(editor_site.url + "/{issn}/index.html")
    )
    with pytest.raises(NotFoundAtEditor):
        service.resolve(req(title="No Such Article Anywhere", editor="editor-y"))


def test_unknown_editor_is_no_resolver():
    service = BinderService()
    with pytest.raises(NoResolver):
        service.resolve(req(editor="editor-zz"))


def test_template_probe_failure_is_not_found(editor_site):
    service = BinderService()
    service.register_resolver(
        "editor-x", TemplateResolver(editor_site.url + "/{issn}/{volume}/{first_page}.missing")
    )
    with pytest.raises(NotFoundAtEditor):
        service.resolve(req())


def test_reregistration_replaces_with_warning(editor_site, caplog):
    service = BinderService()
    service.register_resolver(
        "editor-x", TemplateResolver(editor_site.url + "/{issn}/{volume}/{first_page}.missing")
    )
    with caplog.at_level(logging.WARNING):
        service.register_resolver(
            "editor-x", TemplateResolver(editor_site.url + "/{issn}/{volume}/{first_page}.pdf")
        )
    assert any("replaced" in r.message for r in caplog.records)
    assert service.resolve(req()).url.endswith(".pdf")


def test_probe_uses_head_not_get(editor_site, monkeypatch):
    # resolution must not mutate the editor site; the probe is a HEAD
    service = BinderService()
    service.register_resolver(
        "editor-x", TemplateResolver(editor_site.url + "/{issn}/{volume}/{first_page}.pdf")
    )
    calls = []
    original = service.session.head

    def spy(url, **kw):
        calls.append(url)
        return original(url, **kw)

    monkeypatch.setattr(service.session, "head", spy)
    monkeypatch.setattr(
        service.session, "post", lambda *a, **k: pytest.fail("probe must not POST")
    )
    service.resolve(req())
    assert calls


def test_non_http_candidates_are_skipped(editor_site):
    service = BinderService()
    service.register_resolver("editor-x", TemplateResolver("ftp://host/{issn}/{volume}"))
    with pytest.raises(NotFoundAtEditor):
        service.resolve(req())


def test_per_editor_rate_limit_spaces_resolutions(editor_site):
    import time as time_mod

    service = BinderService()
    service.register_resolver(
        "editor-x",
        TemplateResolver(editor_site.url + "/{issn}/{volume}/{first_page}.pdf"),
        min_interval=0.15,
    )
    started = time_mod.monotonic()
    service.resolve(req())
    service.resolve(req())
    assert time_mod.monotonic() - started >= 0.15


def test_build_from_editor_specs(editor_site):
    service = build_binder_service(
        {
            "editor-x": {
                "kind": "template",
                "template": editor_site.url + "/{issn}/{volume}/{first_page}.pdf",
            },
            "editor-y": {"kind": "listing", "listing": editor_site.url + "/{issn}/index.html"},
        }
    )
    assert service.editors() == ["editor-x", "editor-y"]
    assert service.resolve(req()).url.endswith("/1.pdf")
    with pytest.raises(ValueError):
        build_binder_service({"e": {"kind": "sparql"}})
