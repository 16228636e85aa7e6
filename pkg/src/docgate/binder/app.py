"""HTTP face of the binder: POST /resolve with the reference fields."""

from __future__ import annotations

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from . import BinderService, NoResolver, NotFoundAtEditor, ResolveRequest, UpstreamTimeout


def build_app(service: BinderService) -> FastAPI:
    app = FastAPI(title="binder")
    app.state.service = service

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "service": "binder", "editors": service.editors()}

    @app.post("/resolve")
    def resolve(body: dict):
        try:
            req = ResolveRequest.from_dict(body)
        except (KeyError, TypeError, ValueError) as exc:
            return JSONResponse({"error": "BadRequest", "detail": str(exc)}, status_code=400)
        try:
            result = service.resolve(req)
        except NoResolver as exc:
            return JSONResponse({"error": "NoResolver", "detail": str(exc)}, status_code=404)
        except NotFoundAtEditor as exc:
            return JSONResponse({"error": "NotFoundAtEditor", "detail": str(exc)}, status_code=404)
        except UpstreamTimeout as exc:
            return JSONResponse(
                {"error": "UpstreamTimeout", "detail": str(exc), "elapsed": exc.elapsed},
                status_code=504,
            )
        return result.to_dict()

    return app
