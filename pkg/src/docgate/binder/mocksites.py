"""Mock editor sites for tests and demos.

An editor site is a static file tree: one placeholder document per article
plus an HTML listing page per journal. Template-style editors are resolved
by path convention; listing-style editors are resolved by scraping the
listing page. The tree is served by a plain threading HTTP server (GET and
HEAD both work, which the binder's probe relies on).
"""

from __future__ import annotations

import threading
from functools import partial
from http.server import SimpleHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from xml.sax.saxutils import escape

from ..ingest.pivot import PivotSummary


def document_bytes(issn: str, volume: int, issue: int, seq: int) -> bytes:
    """Deterministic placeholder content standing in for the editor's PDF."""
    return (
        f"%DOC {issn} v{volume} i{issue} a{seq}\n".encode("ascii")
        + b"placeholder full text\n" * 4
    )


def build_editor_tree(root: Path, summaries: list[PivotSummary]) -> None:
    """Materialize documents and listing pages for the given issues.

    Documents land at <root>/<issn>/<volume>/<first_page>.pdf (the path the
    template resolver expands); each journal gets <root>/<issn>/index.html
    linking every article by title (what the listing resolver scrapes).
    """
    per_journal: dict[str, list[tuple[PivotSummary, int, str]]] = {}
    for s in summaries:
        for a in s.articles:
            rel = f"{s.volume}/{a.first_page}.pdf"
            path = root / s.issn / rel
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(document_bytes(s.issn, s.volume, s.issue, a.seq))
            per_journal.setdefault(s.issn, []).append((s, a.seq, rel))
    for j_issn, entries in per_journal.items():
        items = []
        for s, seq, rel in entries:
            a = s.article(seq)
            assert a is not None
            items.append(f'    <li><a href="{rel}">{escape(a.title)}</a></li>')
        page = (
            "<html><head><title>%s</title></head><body>\n<ul>\n%s\n</ul>\n</body></html>\n"
            % (j_issn, "\n".join(items))
        )
        (root / j_issn / "index.html").write_text(page, "utf-8")


class EditorSiteServer:
    """Serves one editor tree over HTTP in a daemon thread."""

    def __init__(self, root: Path, host: str = "127.0.0.1", port: int = 0):
        handler = partial(_QuietHandler, directory=str(root))
        self.httpd = ThreadingHTTPServer((host, port), handler)
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self.httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "EditorSiteServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()


class _QuietHandler(SimpleHTTPRequestHandler):
    def log_message(self, *args):  # tests do not want request noise
        pass
