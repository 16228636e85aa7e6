from __future__ import annotations

import threading
from pathlib import Path

import pytest

from docgate.binder import BinderService, ListingResolver, TemplateResolver
from docgate.binder.client import InProcessBinderClient
from docgate.binder.mocksites import EditorSiteServer
from docgate.config import load_config
from docgate.demo import seed_demo
from docgate.docserver import DocumentServer
from docgate.docserver.client import InProcessDocServerClient
from docgate.ingest.pipeline import IngestPipeline
from docgate.summary.app import build_service


class CountingBinderClient:
    """Counts resolutions; the single-flight and cache tests assert on it."""

    def __init__(self, inner):
        self.inner = inner
        self.calls = 0
        self._lock = threading.Lock()

    def resolve(self, req):
        with self._lock:
            self.calls += 1
        return self.inner.resolve(req)


class DemoEnv:
    """The seeded demo deployment wired fully in-process.

    Editor sites run as real local HTTP servers on free ports (the binder
    probes them over the wire); everything else is linked directly.
    """

    def __init__(self, root: Path):
        self.root = Path(root)
        self.manifest = seed_demo(self.root, base_port=18600)
        self.config = load_config(self.manifest["config"])

        self.editor_x = EditorSiteServer(self.root / "editors" / "editor-x").start()
        self.editor_y = EditorSiteServer(self.root / "editors" / "editor-y").start()
        binder = BinderService()
        binder.register_resolver(
            "editor-x", TemplateResolver(self.editor_x.url + "/{issn}/{volume}/{first_page}.pdf")
        )
        binder.register_resolver(
            "editor-y", ListingResolver(self.editor_y.url + "/{issn}/index.html")
        )
        self.binder_service = binder
        self.binder_client = CountingBinderClient(InProcessBinderClient(binder))

        self.docservers: dict[str, DocumentServer] = {}
        doc_clients = {}
        for inst_id, settings in self.config.docservers.items():
            server = DocumentServer(
                institution=self.config.consortium.institution(inst_id),
                consortium=self.config.consortium,
                fees=self.config.fees,
                binder=self.binder_client,
                data_dir=settings.data_dir,
            )
            self.docservers[inst_id] = server
            doc_clients[inst_id] = InProcessDocServerClient(
                server, base_url=settings.endpoint.url
            )
        self.doc_clients = doc_clients

        self.service = build_service(self.config, docserver_clients=doc_clients)
        self.store = self.service.store
        self.pipeline = IngestPipeline(
            self.store,
            self.config.consortium.journals,
            arrivals_log=self.config.summary.data_dir / "new-arrivals.jsonl",
        )

    def ingest_all(self):
        reports = []
        for provider_id, feed in self.manifest["feeds"].items():
            reports.append(
                self.pipeline.run_batch([Path(feed)], self.config.providers[provider_id])
            )
        return reports

    def keys(self) -> dict[str, str]:
        return self.manifest["article_keys"]

    def ips(self) -> dict[str, str]:
        return self.manifest["user_ips"]

    def stop(self):
        self.editor_x.stop()
        self.editor_y.stop()


@pytest.fixture
def demo_env(tmp_path):
    env = DemoEnv(tmp_path / "demo")
    yield env
    env.stop()


@pytest.fixture
def seeded_env(demo_env):
    demo_env.ingest_all()
    return demo_env
