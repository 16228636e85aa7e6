"""Self-contained demo deployment: four institutions, four journals, two
providers, two mock editor sites.

`seed_demo` writes everything a walkthrough needs into one directory:
the configuration file, provider feed files, the editor site trees, and
empty data directories for the services. The same fixture backs the test
suite's end-to-end scenarios, so every documented walkthrough is
reproducible from scratch.

The cast:

* inst-a subscribes to the electronic version of the routing journal:
  its members get articles on the workstation, everyone else gets a
  printout made by inst-a.
* inst-b holds the archival-practice journal on paper and offers
  digitalization.
* inst-c holds the computing-and-culture review on paper and cannot
  digitalize: classical photocopy by post.
* inst-d subscribes to nothing and runs no document server; its members
  consume everything through shared-mode delivery.
"""

from __future__ import annotations

import json
from datetime import date, datetime, timezone
from pathlib import Path

from . import issn as issn_mod
from .binder.mocksites import build_editor_tree
from .ingest.pivot import ArticleRef, PivotSummary

ISSN_ROUTING = issn_mod.make("1000000")     # 1000-0003, editor-x, inst-a electronic
ISSN_ARCHIVAL = issn_mod.make("2000000")    # 2000-0006, editor-y, inst-b paper
ISSN_CULTURE = issn_mod.make("3000000")     # 3000-0009, editor-x, inst-c paper
ISSN_GEOMETRY = issn_mod.make("9000000")    # 9000-0005, editor-y, nobody subscribes

DEMO_ARRIVAL = datetime(2026, 6, 1, 8, 0, 0, tzinfo=timezone.utc)
ADMIN_TOKEN = "demo-admin-token"

_RIGHTS_ALL = {
    "navigation_browsing": True,
    "alert_service": True,
    "photocopy_service": True,
    "digitalization": True,
    "electronic_access": True,
}
_RIGHTS_STUDENT = {
    "navigation_browsing": True,
    "alert_service": True,
    "photocopy_service": True,
}
_RIGHTS_BROWSE = {"navigation_browsing": True}


def demo_summaries() -> dict[str, list[PivotSummary]]:
    """The demo corpus, keyed by provider id."""
    tabs = [
        PivotSummary(
            issn=ISSN_ROUTING,
            journal_title="Annals of Network Routing",
            volume=12,
            issue=1,
            cover_date=date(2026, 3, 1),
            provider="tabs",
            arrival=DEMO_ARRIVAL,
            articles=(
                ArticleRef(
                    seq=1,
                    title="Adaptive Routing in Overlay Networks",
                    authors=("R. Smith", "L. Ohara"),
                    first_page=1,
                    last_page=18,
                    abstract="A quixotic appraisal of latency bounds under churn.",
                ),
                ArticleRef(
                    seq=2,
                    title="Consensus Under Partition",
                    authors=("M. Duval",),
                    first_page=19,
                    last_page=34,
                ),
                ArticleRef(
                    seq=3,
                    title="Cache Coherence Revisited",
                    authors=("R. Smith", "T. Nakamura"),
                    first_page=35,
                    last_page=52,
                    abstract="Hierarchies of shared caches in large deployments.",
                ),
            ),
        ),
        PivotSummary(
            issn=ISSN_ARCHIVAL,
            journal_title="Journal of Archival Practice",
            volume=5,
            issue=2,
            cover_date=date(2026, 4, 15),
            provider="tabs",
            arrival=DEMO_ARRIVAL,
            articles=(
                ArticleRef(
                    seq=1,
                    title="Provenance in Digital Archives",
                    authors=("H. Arendtsen",),
                    first_page=101,
                    last_page=120,
                    abstract="Provenance chains across custodial transfers.",
                ),
                ArticleRef(
                    seq=2,
                    title="Microfilm to Pixel: Migration Stories",
                    authors=("P. Okafor", "J. Lindqvist"),
                    first_page=121,
                    last_page=140,
                ),
            ),
        ),
    ]
    tagged = [
        PivotSummary(
            issn=ISSN_CULTURE,
            journal_title="Computing and Culture Review",
            volume=12,
            issue=3,
            cover_date=date(2026, 5, 1),
            provider="tagged",
            arrival=DEMO_ARRIVAL,
            articles=(
                ArticleRef(
                    seq=1,
                    title="Machine Translation of Medieval Manuscripts",
                    authors=("Éloïse Ferré", "K. Braun"),
                    first_page=201,
                    last_page=226,
                    abstract="Sequence models against scribal abbreviation.",
                ),
                ArticleRef(
                    seq=2,
                    title="Reading Habits in Networked Societies",
                    authors=("S. Whitcombe",),
                    first_page=227,
                    last_page=240,
                ),
            ),
        ),
        PivotSummary(
            issn=ISSN_GEOMETRY,
            journal_title="Letters in Applied Geometry",
            volume=2,
            issue=1,
            cover_date=date(2026, 5, 20),
            provider="tagged",
            arrival=DEMO_ARRIVAL,
            articles=(
                ArticleRef(
                    seq=1,
                    title="Tilings of Hyperbolic Planes",
                    authors=("N. Okabe",),
                    first_page=11,
                    last_page=29,
                    abstract="Aperiodic tilings from reflection groups.",
                ),
            ),
        ),
    ]
    return {"tabs": tabs, "tagged": tagged}


def to_swetslike(summaries: list[PivotSummary]) -> str:
    lines = []
    for s in summaries:
        lines.append(
            "\t".join(
                ["ISSUE", s.issn, s.journal_title, str(s.volume), str(s.issue),
                 s.cover_date.isoformat()]
            )
        )
        for a in s.articles:
            fields = ["ARTICLE", a.title, "; ".join(a.authors), str(a.first_page), str(a.last_page)]
            if a.abstract is not None:
                fields.append(a.abstract)
            lines.append("\t".join(fields))
    return "\n".join(lines) + "\n"


def to_editoralert(summaries: list[PivotSummary]) -> str:
    blocks = []
    for s in summaries:
        lines = [
            f"JOURNAL: {s.journal_title}",
            f"ISSN: {s.issn}",
            f"VOLUME: {s.volume}",
            f"ISSUE: {s.issue}",
            f"DATE: {s.cover_date.isoformat()}",
        ]
        for a in s.articles:
            lines.append("")
            lines.append(f"TITLE: {a.title}")
            if a.authors:
                lines.append(f"AUTHORS: {'; '.join(a.authors)}")
            lines.append(f"PAGES: {a.first_page}-{a.last_page}")
            if a.abstract is not None:
                lines.append(f"ABSTRACT: {a.abstract}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def demo_config_dict(dest: Path, base_port: int) -> dict:
    host = "127.0.0.1"
    p_summary = base_port
    p_binder = base_port + 1
    p_doc_a, p_doc_b, p_doc_c = base_port + 2, base_port + 3, base_port + 4
    p_ed_x, p_ed_y = base_port + 5, base_port + 6

    def url(port: int) -> str:
        return f"http://{host}:{port}"

    return {
        "admin_token": ADMIN_TOKEN,
        "trusted_proxies": ["127.0.0.1", "::1", "testclient"],
        "fees": {
            "billing_by_mode": {
                "PrintAtAuthorizedPrinter": "1.50",
                "DigitalizeThenPrint": "4.00",
                "PhotocopyPostalMail": "2.50",
            },
            "copyright_per_page": "0.10",
        },
        "journals": [
            {
                "issn": ISSN_ROUTING,
                "title": "Annals of Network Routing",
                "domains": ["exact-sciences"],
                "editor": "editor-x",
            },
            {
                "issn": ISSN_ARCHIVAL,
                "title": "Journal of Archival Practice",
                "domains": ["human-sciences"],
                "editor": "editor-y",
            },
            {
                "issn": ISSN_CULTURE,
                "title": "Computing and Culture Review",
                "domains": ["human-sciences", "exact-sciences"],
                "editor": "editor-x",
            },
            {
                "issn": ISSN_GEOMETRY,
                "title": "Letters in Applied Geometry",
                "domains": ["exact-sciences"],
                "editor": "editor-y",
            },
        ],
        "institutions": [
            {
                "id": "inst-a",
                "name": "Alpine Institute of Technology",
                "ip_ranges": ["10.1.0.0/16"],
                "can_digitalize": False,
                "authorized_printers": ["prt-a1"],
                "document_server": url(p_doc_a),
                "postal_address": "1 Summit Way, Grenholm",
                "rights_by_category": {
                    "researcher": _RIGHTS_ALL,
                    "student": _RIGHTS_STUDENT,
                    "visitor": _RIGHTS_BROWSE,
                },
            },
            {
                "id": "inst-b",
                "name": "Borealis University Library",
                "ip_ranges": ["10.2.0.0/16"],
                "can_digitalize": True,
                "authorized_printers": ["prt-b1"],
                "document_server": url(p_doc_b),
                "postal_address": "2 Harbour Square, Norvik",
                "rights_by_category": {
                    "researcher": _RIGHTS_ALL,
                    "student": _RIGHTS_STUDENT,
                },
            },
            {
                "id": "inst-c",
                "name": "Collegium of Human Sciences",
                "ip_ranges": ["10.3.0.0/16"],
                "can_digitalize": False,
                "authorized_printers": ["prt-c1"],
                "document_server": url(p_doc_c),
                "postal_address": "3 Cloister Lane, Vantoux",
                "rights_by_category": {
                    "researcher": _RIGHTS_ALL,
                    "student": _RIGHTS_STUDENT,
                },
            },
            {
                "id": "inst-d",
                "name": "Delta Research Campus",
                "ip_ranges": ["10.4.0.0/16"],
                "can_digitalize": False,
                "authorized_printers": ["prt-d1"],
                "document_server": None,
                "postal_address": "4 Delta Esplanade, Ostrelle",
                "rights_by_category": {
                    "researcher": _RIGHTS_ALL,
                    "student": _RIGHTS_BROWSE,
                },
            },
        ],
        "subscriptions": [
            {"institution": "inst-a", "issn": ISSN_ROUTING, "format": "Electronic"},
            {"institution": "inst-b", "issn": ISSN_ARCHIVAL, "format": "Paper"},
            {"institution": "inst-c", "issn": ISSN_CULTURE, "format": "Paper"},
        ],
        "providers": [
            {"id": "tabs", "adapter": "swetslike", "title_filter": "accept-all"},
            {"id": "tagged", "adapter": "editoralert", "title_filter": "accept-all"},
        ],
        "summary_server": {
            "listen": f"{host}:{p_summary}",
            "data_dir": str(dest / "data" / "summary"),
            "mail_sink": {"kind": "spool", "directory": str(dest / "data" / "summary" / "mail-spool")},
        },
        "binder": {
            "listen": f"{host}:{p_binder}",
            "editors": {
                "editor-x": {
                    "kind": "template",
                    "template": url(p_ed_x) + "/{issn}/{volume}/{first_page}.pdf",
                },
                "editor-y": {
                    "kind": "listing",
                    "listing": url(p_ed_y) + "/{issn}/index.html",
                },
            },
        },
        "docservers": [
            {
                "institution": "inst-a",
                "listen": f"{host}:{p_doc_a}",
                "data_dir": str(dest / "data" / "docserver-a"),
            },
            {
                "institution": "inst-b",
                "listen": f"{host}:{p_doc_b}",
                "data_dir": str(dest / "data" / "docserver-b"),
            },
            {
                "institution": "inst-c",
                "listen": f"{host}:{p_doc_c}",
                "data_dir": str(dest / "data" / "docserver-c"),
            },
        ],
        "editor_sites": [
            {"id": "editor-x", "listen": f"{host}:{p_ed_x}", "root": str(dest / "editors" / "editor-x")},
            {"id": "editor-y", "listen": f"{host}:{p_ed_y}", "root": str(dest / "editors" / "editor-y")},
        ],
    }


def seed_demo(dest: Path, base_port: int = 8600) -> dict:
    """Build the demo tree; returns a manifest of the interesting paths."""
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    cfg = demo_config_dict(dest, base_port)
    config_path = dest / "config.json"
    config_path.write_text(json.dumps(cfg, indent=2, ensure_ascii=False) + "\n", "utf-8")

    corpus = demo_summaries()
    feeds_dir = dest / "feeds"
    feeds_dir.mkdir(exist_ok=True)
    batch_tabs = feeds_dir / "batch-tabs.tsv"
    batch_tabs.write_text(to_swetslike(corpus["tabs"]), "utf-8")
    batch_tagged = feeds_dir / "batch-tagged.txt"
    batch_tagged.write_text(to_editoralert(corpus["tagged"]), "utf-8")

    by_editor: dict[str, list[PivotSummary]] = {"editor-x": [], "editor-y": []}
    journal_editor = {j["issn"]: j["editor"] for j in cfg["journals"]}
    for summaries in corpus.values():
        for s in summaries:
            by_editor[journal_editor[s.issn]].append(s)
    for site in cfg["editor_sites"]:
        root = Path(site["root"])
        root.mkdir(parents=True, exist_ok=True)
        build_editor_tree(root, by_editor[site["id"]])

    for section in (cfg["summary_server"], *cfg["docservers"]):
        Path(section["data_dir"]).mkdir(parents=True, exist_ok=True)

    return {
        "config": str(config_path),
        "feeds": {"tabs": str(batch_tabs), "tagged": str(batch_tagged)},
        "article_keys": {
            "electronic_local": f"{ISSN_ROUTING}:v12:i1:a1",
            "remote_print": f"{ISSN_ROUTING}:v12:i1:a2",
            "digitalize_print": f"{ISSN_ARCHIVAL}:v5:i2:a1",
            "photocopy_mail": f"{ISSN_CULTURE}:v12:i3:a1",
        },
        "user_ips": {
            "inst-a": "10.1.0.9",
            "inst-b": "10.2.0.9",
            "inst-c": "10.3.0.9",
            "inst-d": "10.4.0.9",
        },
        "admin_token": ADMIN_TOKEN,
        "summary_url": f"http://127.0.0.1:{base_port}",
    }
