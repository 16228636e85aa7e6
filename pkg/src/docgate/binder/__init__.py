"""The binder: resolves an article's bibliographic reference to the URL of
its full text on the editor's site.

Editors expose their documents differently, so resolution is a per-editor
plugin: one expands a URL template from the reference fields, another
scrapes the journal's listing page for a matching title. Whatever the
strategy, a candidate URL is only returned after a successful non-mutating
probe, so callers never receive a dead link.
"""

from __future__ import annotations

import logging
import re
import threading
import time
from dataclasses import dataclass
from typing import Iterable, Optional, Protocol
from urllib.parse import urljoin

import requests

log = logging.getLogger(__name__)

PROBE_TIMEOUT_SECONDS = 5.0
PROBE_RETRIES = 1


class NoResolver(LookupError):
    pass


class NotFoundAtEditor(LookupError):
    pass


class UpstreamTimeout(TimeoutError):
    def __init__(self, elapsed: float):
        super().__init__(f"editor site did not answer within {elapsed:.1f}s")
        self.elapsed = elapsed


@dataclass(frozen=True)
class ResolveRequest:
    issn: str
    volume: int
    issue: int
    first_page: int
    title: str
    editor: str

    def to_dict(self) -> dict:
        return {
            "issn": self.issn,
            "volume": self.volume,
            "issue": self.issue,
            "first_page": self.first_page,
            "title": self.title,
            "editor": self.editor,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ResolveRequest":
        return cls(
            issn=d["issn"],
            volume=int(d["volume"]),
            issue=int(d["issue"]),
            first_page=int(d["first_page"]),
            title=d["title"],
            editor=d["editor"],
        )


@dataclass(frozen=True)
class ResolveResult:
    url: str
    resolver: str
    elapsed: float  # seconds

    def to_dict(self) -> dict:
        return {"url": self.url, "resolver": self.resolver, "elapsed": self.elapsed}


class ResolverPlugin(Protocol):
    def candidate_urls(self, req: ResolveRequest, session: requests.Session) -> Iterable[str]: ...


class TemplateResolver:
    """URL template expansion: fields of the reference fill the template."""

    def __init__(self, template: str):
        self.template = template

    def candidate_urls(self, req: ResolveRequest, session: requests.Session) -> Iterable[str]:
        yield self.template.format(
            issn=req.issn,
            volume=req.volume,
            issue=req.issue,
            first_page=req.first_page,
        )


_ANCHOR_RE = re.compile(r'<a\s+href="(?P<href>[^"]+)"[^>]*>(?P<text>.*?)</a>', re.S | re.I)


class ListingResolver:
    """Scrapes the journal's listing page for an anchor matching the title."""

    def __init__(self, listing_template: str):
        # e.g. "http://editor/{issn}/index.html"
        self.listing_template = listing_template

    def candidate_urls(self, req: ResolveRequest, session: requests.Session) -> Iterable[str]:
        listing_url = self.listing_template.format(issn=req.issn)
        try:
            resp = session.get(listing_url, timeout=PROBE_TIMEOUT_SECONDS)
        except requests.Timeout:
            raise UpstreamTimeout(PROBE_TIMEOUT_SECONDS) from None
        except requests.RequestException as exc:
            raise NotFoundAtEditor(f"listing page unreachable: {exc}") from None
        if resp.status_code != 200:
            raise NotFoundAtEditor(f"listing page answered {resp.status_code}")
        wanted = req.title.strip().lower()
        for m in _ANCHOR_RE.finditer(resp.text):
            text = re.sub(r"\s+", " ", m["text"]).strip().lower()
            if wanted and wanted in text:
                yield urljoin(listing_url, m["href"])


class BinderService:
    """Dispatches resolution requests to per-editor plugins.

    Stateless per request apart from the optional per-editor rate limit
    (minimum spacing between resolutions against one editor; off by
    default)."""

    def __init__(self, session: Optional[requests.Session] = None):
        self._plugins: dict[str, ResolverPlugin] = {}
        self._min_interval: dict[str, float] = {}
        self._last_call: dict[str, float] = {}
        self._rate_lock = threading.Lock()
        self.session = session or requests.Session()

    def register_resolver(
        self, editor: str, plugin: ResolverPlugin, min_interval: Optional[float] = None
    ) -> None:
        if editor in self._plugins:
            log.warning("resolver for editor %r replaced", editor)
        self._plugins[editor] = plugin
        if min_interval:
            self._min_interval[editor] = float(min_interval)
        else:
            self._min_interval.pop(editor, None)

    def editors(self) -> list[str]:
        return sorted(self._plugins)

    def _throttle(self, editor: str) -> None:
        interval = self._min_interval.get(editor)
        if not interval:
            return
        with self._rate_lock:
            wait = self._last_call.get(editor, 0.0) + interval - time.monotonic()
            if wait > 0:
                time.sleep(wait)
            self._last_call[editor] = time.monotonic()

    def _probe(self, url: str) -> bool:
        last_exc: Optional[Exception] = None
        for _ in range(1 + PROBE_RETRIES):
            try:
                resp = self.session.head(url, timeout=PROBE_TIMEOUT_SECONDS, allow_redirects=True)
                return resp.status_code == 200
            except requests.Timeout as exc:
                last_exc = exc
            except requests.RequestException:
                return False
        raise UpstreamTimeout(PROBE_TIMEOUT_SECONDS) from last_exc

    def resolve(self, req: ResolveRequest) -> ResolveResult:
        plugin = self._plugins.get(req.editor)
        if plugin is None:
            raise NoResolver(f"no resolver registered for editor {req.editor!r}")
        self._throttle(req.editor)
        started = time.monotonic()
        for url in plugin.candidate_urls(req, self.session):
            if not url.startswith(("http://", "https://")):
                log.warning("editor %r produced a non-http candidate %r", req.editor, url)
                continue
            if self._probe(url):
                return ResolveResult(
                    url=url, resolver=req.editor, elapsed=time.monotonic() - started
                )
        raise NotFoundAtEditor(f"{req.title!r} not found on editor {req.editor!r}")


def resolver_from_spec(spec: dict) -> ResolverPlugin:
    kind = spec.get("kind")
    if kind == "template":
        return TemplateResolver(spec["template"])
    if kind == "listing":
        return ListingResolver(spec["listing"])
    raise ValueError(f"unknown resolver kind {kind!r}")


def build_binder_service(editors: dict) -> BinderService:
    service = BinderService()
    for editor, spec in editors.items():
        service.register_resolver(
            editor, resolver_from_spec(spec), min_interval=spec.get("min_interval")
        )
    return service
