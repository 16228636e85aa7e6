"""Operator command line for the whole deployment.

One binary, one subcommand per operation: serve any of the services, run
ingestion batches and archive replays, trigger digests, simulate end-user
article requests, complete the manual photocopy/digitalization jobs, export
statistics, and seed the demo fixture.

Exit codes: 0 success, 2 configuration problem, 3 remote service
unreachable, 4 domain error (the command reached a service and was told
no). Errors print one machine-parseable line on stderr:
``error: <code>: <detail>``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from functools import partial
from http.server import ThreadingHTTPServer
from pathlib import Path

import requests

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UNREACHABLE = 3
EXIT_DOMAIN = 4


class CliError(Exception):
    def __init__(self, exit_code: int, code: str, detail: str):
        super().__init__(f"{code}: {detail}")
        self.exit_code = exit_code
        self.code = code
        self.detail = detail


def _fail(exit_code: int, code: str, detail: str) -> "CliError":
    return CliError(exit_code, code, detail)


def _load_config(args):
    from .config import ConfigError, load_config

    path = args.config or os.environ.get("DOCGATE_CONFIG")
    if not path:
        raise _fail(EXIT_CONFIG, "ConfigMissing", "pass --config or set DOCGATE_CONFIG")
    try:
        return load_config(path)
    except ConfigError as exc:
        raise _fail(EXIT_CONFIG, "ConfigError", str(exc)) from exc


def _http(call, *a, **kw) -> requests.Response:
    try:
        return call(*a, timeout=kw.pop("timeout", 60), **kw)
    except requests.ConnectionError as exc:
        raise _fail(EXIT_UNREACHABLE, "Unreachable", str(exc)) from exc
    except requests.Timeout as exc:
        raise _fail(EXIT_UNREACHABLE, "Timeout", str(exc)) from exc


def _check(resp: requests.Response) -> dict:
    if 200 <= resp.status_code < 300:
        return resp.json() if resp.content else {}
    try:
        body = resp.json()
        raise _fail(EXIT_DOMAIN, body.get("error", "HttpError"), body.get("detail", ""))
    except ValueError:
        raise _fail(EXIT_DOMAIN, "HttpError", f"{resp.status_code}: {resp.text[:200]}") from None


# -- serve ------------------------------------------------------------------


def cmd_serve(args) -> int:
    import uvicorn

    config = _load_config(args)
    role = args.role
    if role == "summary":
        from .summary.app import AlreadyRunning, build_app

        try:
            app = build_app(config)
        except AlreadyRunning as exc:
            raise _fail(EXIT_CONFIG, "AlreadyRunning", str(exc)) from exc
        endpoint = config.summary.endpoint
    elif role == "document":
        if not args.institution:
            raise _fail(EXIT_CONFIG, "ConfigMissing", "serve document needs --institution")
        settings = config.docservers.get(args.institution)
        if settings is None:
            raise _fail(
                EXIT_CONFIG, "ConfigError", f"no docserver configured for {args.institution!r}"
            )
        from .binder.client import HttpBinderClient
        from .docserver import DocumentServer
        from .docserver.app import build_app as build_doc_app

        server = DocumentServer(
            institution=config.consortium.institution(args.institution),
            consortium=config.consortium,
            fees=config.fees,
            binder=HttpBinderClient(config.binder.endpoint.url),
            data_dir=settings.data_dir,
        )
        app = build_doc_app(server)
        endpoint = settings.endpoint
    elif role == "binder":
        from .binder import build_binder_service
        from .binder.app import build_app as build_binder_app

        app = build_binder_app(build_binder_service(config.binder.editors))
        endpoint = config.binder.endpoint
    elif role == "editor-site":
        return _serve_editor_site(config, args)
    else:  # pragma: no cover - argparse restricts choices
        raise _fail(EXIT_CONFIG, "ConfigError", f"unknown role {role!r}")

    listen = args.listen or endpoint.listen
    host, _, port = listen.rpartition(":")
    uvicorn.run(app, host=host, port=int(port), log_level="warning")
    return EXIT_OK


def _serve_editor_site(config, args) -> int:
    from http.server import SimpleHTTPRequestHandler

    raw = json.loads(Path(config.path).read_text("utf-8"))
    sites = {s["id"]: s for s in raw.get("editor_sites", [])}
    site = sites.get(args.institution or "")
    if site is None:
        raise _fail(
            EXIT_CONFIG,
            "ConfigError",
            "serve editor-site needs --institution <editor id> present in editor_sites",
        )
    listen = args.listen or site["listen"]
    host, _, port = listen.rpartition(":")
    handler = partial(SimpleHTTPRequestHandler, directory=site["root"])
    httpd = ThreadingHTTPServer((host, int(port)), handler)
    print(f"serving editor site {site['id']} from {site['root']} on {listen}")
    httpd.serve_forever()
    return EXIT_OK


# -- ingestion ----------------------------------------------------------------


def _build_pipeline(config):
    from .ingest.pipeline import IngestPipeline
    from .ingest.store import SummaryStore

    data_dir = config.summary.data_dir
    store = SummaryStore(data_dir)
    return IngestPipeline(
        store,
        config.consortium.journals,
        arrivals_log=data_dir / "new-arrivals.jsonl",
    )


def cmd_ingest(args) -> int:
    config = _load_config(args)
    try:
        cfg = config.provider(args.provider)
    except Exception as exc:
        raise _fail(EXIT_CONFIG, "ConfigError", str(exc)) from exc
    files = [Path(f) for f in args.files]
    missing = [str(f) for f in files if not f.exists()]
    if missing:
        raise _fail(EXIT_CONFIG, "ConfigError", f"no such feed file: {', '.join(missing)}")
    report = _build_pipeline(config).run_batch(files, cfg)
    print(report.one_line())
    return EXIT_OK if report.counts()["parse_failures"] == 0 else EXIT_DOMAIN


def cmd_reprocess(args) -> int:
    config = _load_config(args)
    cfg = config.provider(args.provider)
    report = _build_pipeline(config).reprocess(cfg)
    print(report.one_line())
    return EXIT_OK


# -- client commands -------------------------------------------------------------


def cmd_request(args) -> int:
    config = _load_config(args)
    url = f"{config.summary.endpoint.url}/requests"
    body = {"article_key": args.article_key, "category": args.category}
    if args.email:
        body["email"] = args.email
    resp = _http(requests.post, url, json=body, headers={"X-Forwarded-For": args.ip})
    data = _check(resp)
    plan = data.get("plan", {})
    print(
        f"status={data['status']} mode={plan.get('mode')} request={data['request_id']}"
        + (f" locator={data['locator']}" if data.get("locator") else "")
        + (f" job={data['job_id']}@{data['job_institution']}" if data.get("job_id") else "")
    )
    if data.get("message"):
        print(f"message: {data['message']}")
    return EXIT_OK


def cmd_request_status(args) -> int:
    config = _load_config(args)
    resp = _http(requests.get, f"{config.summary.endpoint.url}/requests/{args.request_id}")
    data = _check(resp)
    print(
        f"status={data['status']} mode={data.get('plan', {}).get('mode')}"
        + (f" locator={data['locator']}" if data.get("locator") else "")
    )
    if data.get("message"):
        print(f"message: {data['message']}")
    return EXIT_OK


def cmd_job_complete(args) -> int:
    config = _load_config(args)
    scan = Path(args.scan).read_bytes() if args.scan else None
    for inst_id, settings in config.docservers.items():
        base = settings.endpoint.url
        resp = _http(requests.get, f"{base}/jobs", params={"job_id": args.job_id})
        jobs = _check(resp).get("jobs", [])
        if not jobs:
            continue
        job = jobs[0]
        if job["kind"] == "mail":
            done = _check(_http(requests.post, f"{base}/mail-jobs/{args.job_id}/complete"))
        else:
            done = _check(
                _http(
                    requests.post,
                    f"{base}/print-jobs/{args.job_id}/complete",
                    data=scan or b"",
                )
            )
        print(
            f"job={done['id']} kind={done['kind']} state={done['state']} "
            f"institution={inst_id} detail={done['detail']}"
        )
        return EXIT_OK
    raise _fail(EXIT_DOMAIN, "UnknownJob", f"no document server knows job {args.job_id}")


def cmd_digest_run(args) -> int:
    config = _load_config(args)
    resp = _http(
        requests.post,
        f"{config.summary.endpoint.url}/admin/digest/run",
        headers={"Authorization": f"Bearer {config.admin_token}"},
    )
    data = _check(resp)
    print(f"digest={data['run_id']} messages={len(data['messages'])}")
    for m in data["messages"]:
        print(f"  {m['email']}: {len(m['summary_keys'])} new summaries")
    return EXIT_OK


def cmd_stats_export(args) -> int:
    config = _load_config(args)
    resp = _http(
        requests.get,
        f"{config.summary.endpoint.url}/admin/stats/export",
        params={"start": args.start, "end": args.end},
        headers={"Authorization": f"Bearer {config.admin_token}"},
    )
    if resp.status_code != 200:
        _check(resp)
    out = Path(args.out)
    out.write_text(resp.text, "utf-8")
    print(f"wrote {out} ({max(0, len(resp.text.splitlines()) - 1)} rows)")
    return EXIT_OK


def cmd_seed_demo(args) -> int:
    from .demo import seed_demo

    manifest = seed_demo(Path(args.dest), base_port=args.base_port)
    print(json.dumps(manifest, indent=2))
    return EXIT_OK


# -- entry point --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="docgate")
    parser.add_argument("--config", help="configuration file (or env DOCGATE_CONFIG)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run one of the services")
    p.add_argument("role", choices=["summary", "document", "binder", "editor-site"])
    p.add_argument("--institution", help="institution id (document) or editor id (editor-site)")
    p.add_argument("--listen", help="override the configured host:port")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("ingest", help="run an ingestion batch of feed files")
    p.add_argument("provider")
    p.add_argument("files", nargs="+")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("reprocess", help="replay a provider's archived feeds")
    p.add_argument("provider")
    p.set_defaults(fn=cmd_reprocess)

    p = sub.add_parser("request", help="request an article as a given user")
    p.add_argument("ip")
    p.add_argument("category")
    p.add_argument("article_key")
    p.add_argument("--email")
    p.set_defaults(fn=cmd_request)

    p = sub.add_parser("request-status", help="poll a previously created request")
    p.add_argument("request_id")
    p.set_defaults(fn=cmd_request_status)

    p = sub.add_parser("job-complete", help="complete a manual photocopy/digitalization job")
    p.add_argument("job_id")
    p.add_argument("--scan", help="file with scan bytes for digitalize-then-print jobs")
    p.set_defaults(fn=cmd_job_complete)

    p = sub.add_parser("digest-run", help="trigger an alert digest run")
    p.set_defaults(fn=cmd_digest_run)

    p = sub.add_parser("stats-export", help="export usage statistics as CSV")
    p.add_argument("start")
    p.add_argument("end")
    p.add_argument("out")
    p.set_defaults(fn=cmd_stats_export)

    p = sub.add_parser("seed-demo", help="build the demo deployment tree")
    p.add_argument("--dest", required=True)
    p.add_argument("--base-port", type=int, default=8600)
    p.set_defaults(fn=cmd_seed_demo)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CliError as exc:
        print(f"error: {exc.code}: {exc.detail}", file=sys.stderr)
        return exc.exit_code
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
