"""Binder clients: the HTTP client used between services and an in-process
variant sharing the same contract, so tests can link the binder directly."""

from __future__ import annotations

from typing import Protocol

import requests

from . import BinderService, NoResolver, NotFoundAtEditor, ResolveRequest, ResolveResult, UpstreamTimeout


class BinderClient(Protocol):
    def resolve(self, req: ResolveRequest) -> ResolveResult: ...


class InProcessBinderClient:
    def __init__(self, service: BinderService):
        self.service = service

    def resolve(self, req: ResolveRequest) -> ResolveResult:
        return self.service.resolve(req)


class HttpBinderClient:
    def __init__(self, base_url: str, session: requests.Session | None = None):
        self.base_url = base_url.rstrip("/")
        self.session = session or requests.Session()

    def resolve(self, req: ResolveRequest) -> ResolveResult:
        resp = self.session.post(f"{self.base_url}/resolve", json=req.to_dict(), timeout=30)
        if resp.status_code == 200:
            body = resp.json()
            return ResolveResult(url=body["url"], resolver=body["resolver"], elapsed=body["elapsed"])
        body = resp.json() if resp.headers.get("content-type", "").startswith("application/json") else {}
        error = body.get("error", "")
        detail = body.get("detail", resp.text)
        if error == "NoResolver":
            raise NoResolver(detail)
        if error == "UpstreamTimeout" or resp.status_code == 504:
            raise UpstreamTimeout(float(body.get("elapsed", 0.0)))
        raise NotFoundAtEditor(detail)
