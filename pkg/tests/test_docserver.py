from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor

import pytest

from docgate.binder import ResolveRequest
from docgate.docserver import (
    DigitalizationNotOffered,
    JobAlreadyDone,
    NotSubscribed,
    PrinterNotAuthorized,
    ResolveFailed,
    simulated_scan,
)
from docgate.policy import (
    AccessClass,
    DeliveryMode,
    DeliveryPlan,
    Destination,
    DestinationKind,
    Format,
)


def resolve_meta(env, key="electronic_local"):
    issn, rest = env.keys()[key].split(":v", 1)
    volume, rest = rest.split(":i", 1)
    issue, seq = rest.split(":a", 1)
    return ResolveRequest(
        issn=issn,
        volume=int(volume),
        issue=int(issue),
        first_page=1,
        title="Adaptive Routing in Overlay Networks",
        editor="editor-x",
    )


def print_plan(source, printer, mode=DeliveryMode.PRINT_AT_AUTHORIZED_PRINTER):
    return DeliveryPlan(
        mode=mode,
        source_institution=source,
        destination=Destination(DestinationKind.PRINTER, printer),
        delivery_format=Format.PAPER,
        access_class=AccessClass.SHARED,
    )


def mail_plan(source):
    return DeliveryPlan(
        mode=DeliveryMode.PHOTOCOPY_POSTAL_MAIL,
        source_institution=source,
        destination=Destination(DestinationKind.POSTAL, "4 Delta Esplanade, Ostrelle"),
        delivery_format=Format.PAPER,
        access_class=AccessClass.SHARED,
    )


# -- fetch_or_cache -----------------------------------------------------------


def test_first_fetch_resolves_once_and_stores(demo_env):
    server = demo_env.docservers["inst-a"]
    key = demo_env.keys()["electronic_local"]
    doc = server.fetch_or_cache(key, resolve_meta(demo_env))
    assert demo_env.binder_client.calls == 1
    assert doc.data.startswith(b"%DOC")
    assert doc.origin.startswith("editor-fetch:")
    assert server.storage.exists(key)


def test_second_fetch_hits_cache_with_zero_resolutions(demo_env):
    server = demo_env.docservers["inst-a"]
    key = demo_env.keys()["electronic_local"]
    first = server.fetch_or_cache(key, resolve_meta(demo_env))
    calls_after_first = demo_env.binder_client.calls
    second = server.fetch_or_cache(key, resolve_meta(demo_env))
    assert demo_env.binder_client.calls == calls_after_first
    assert second == first


def test_eight_concurrent_first_fetches_resolve_exactly_once(demo_env):
    server = demo_env.docservers["inst-a"]
    key = demo_env.keys()["electronic_local"]
    barrier = threading.Barrier(8)

    def fetch():
        barrier.wait()
        return server.fetch_or_cache(key, resolve_meta(demo_env))

    with ThreadPoolExecutor(max_workers=8) as pool:
        docs = list(pool.map(lambda _: fetch(), range(8)))
    assert demo_env.binder_client.calls == 1
    assert len({d.checksum for d in docs}) == 1


def test_fetch_requires_electronic_subscription(demo_env):
    server = demo_env.docservers["inst-b"]  # paper subscriber only
    with pytest.raises(NotSubscribed):
        server.fetch_or_cache(demo_env.keys()["electronic_local"], resolve_meta(demo_env))


def test_fetch_unresolvable_article(demo_env):
    server = demo_env.docservers["inst-a"]
    bad_meta = ResolveRequest(
        issn="1000-0003", volume=99, issue=9, first_page=999, title="Ghost", editor="editor-x"
    )
    with pytest.raises(ResolveFailed):
        server.fetch_or_cache("1000-0003:v99:i9:a1", bad_meta)


def test_document_bytes_immutable_checksum_stable(demo_env):
    server = demo_env.docservers["inst-a"]
    key = demo_env.keys()["electronic_local"]
    server.fetch_or_cache(key, resolve_meta(demo_env))
    first = server.get_document(key)
    second = server.get_document(key)
    assert first.checksum == second.checksum
    assert first.data == second.data


# -- digitalization ------------------------------------------------------------


def test_digitalize_stores_scan(demo_env):
    server = demo_env.docservers["inst-b"]
    key = demo_env.keys()["digitalize_print"]
    doc = server.digitalize(key, b"scan bytes")
    assert doc.origin == "digitalization"
    assert doc.data == b"scan bytes"


def test_digitalize_rejected_where_not_offered(demo_env):
    server = demo_env.docservers["inst-c"]  # cannot digitalize
    with pytest.raises(DigitalizationNotOffered):
        server.digitalize(demo_env.keys()["photocopy_mail"], b"scan")


def test_digitalize_requires_paper_subscription(demo_env):
    server = demo_env.docservers["inst-b"]
    with pytest.raises(NotSubscribed):
        server.digitalize(demo_env.keys()["electronic_local"], b"scan")


def test_redigitalize_returns_existing(demo_env):
    server = demo_env.docservers["inst-b"]
    key = demo_env.keys()["digitalize_print"]
    first = server.digitalize(key, b"original scan")
    second = server.digitalize(key, b"different scan")
    assert second == first
    assert second.data == b"original scan"


# -- print jobs ---------------------------------------------------------------------


def test_remote_print_executes_and_spools(demo_env):
    server = demo_env.docservers["inst-a"]
    key = demo_env.keys()["electronic_local"]
    job = server.create_print_job(
        key, "prt-d1", print_plan("inst-a", "prt-d1"), "inst-d", pages=16,
        meta=resolve_meta(demo_env),
    )
    assert job.state == "done"
    spool = server.spool_dir / "printers" / "prt-d1" / f"{job.id}.prn"
    assert spool.exists()
    assert spool.read_bytes() == server.get_document(key).data
    kinds = [r["kind"] for r in server.ledger()]
    assert kinds == ["billing", "copyright"]


def test_unknown_printer_rejected(demo_env):
    server = demo_env.docservers["inst-a"]
    with pytest.raises(PrinterNotAuthorized):
        server.create_print_job(
            demo_env.keys()["electronic_local"],
            "prt-zz",
            print_plan("inst-a", "prt-zz"),
            "inst-d",
            meta=resolve_meta(demo_env),
        )


def test_cross_institution_print_emits_one_billing_one_copyright(demo_env):
    server = demo_env.docservers["inst-a"]
    job = server.create_print_job(
        demo_env.keys()["electronic_local"],
        "prt-d1",
        print_plan("inst-a", "prt-d1"),
        "inst-d",
        pages=18,
        meta=resolve_meta(demo_env),
    )
    ledger = server.ledger()
    billing = [r for r in ledger if r["kind"] == "billing"]
    copyright_recs = [r for r in ledger if r["kind"] == "copyright"]
    assert len(billing) == 1 and len(copyright_recs) == 1
    assert billing[0]["source_institution"] == "inst-a"
    assert billing[0]["requesting_institution"] == "inst-d"
    assert billing[0]["fee"] == "1.50"
    assert copyright_recs[0]["paying_institution"] == "inst-d"
    assert copyright_recs[0]["fee"] == "1.80"  # 18 pages at 0.10
    assert copyright_recs[0]["article"] == job.article_key


def test_digitalize_print_waits_for_operator(demo_env):
    server = demo_env.docservers["inst-b"]
    key = demo_env.keys()["digitalize_print"]
    plan = print_plan("inst-b", "prt-d1", mode=DeliveryMode.DIGITALIZE_THEN_PRINT)
    job = server.create_print_job(key, "prt-d1", plan, "inst-d", pages=20)
    assert job.state == "queued" and job.needs_digitalization
    done = server.complete_print_job(job.id, b"the scan")
    assert done.state == "done"
    assert server.get_document(key).origin == "digitalization"
    assert (server.spool_dir / "printers" / "prt-d1" / f"{job.id}.prn").read_bytes() == b"the scan"
    with pytest.raises(JobAlreadyDone):
        server.complete_print_job(job.id)


def test_digitalize_print_executes_immediately_when_scan_exists(demo_env):
    server = demo_env.docservers["inst-b"]
    key = demo_env.keys()["digitalize_print"]
    server.digitalize(key, b"scan already here")
    plan = print_plan("inst-b", "prt-d1", mode=DeliveryMode.DIGITALIZE_THEN_PRINT)
    job = server.create_print_job(key, "prt-d1", plan, "inst-d")
    assert job.state == "done"


def test_simulated_scanner_fills_in_when_no_scan_supplied(demo_env):
    server = demo_env.docservers["inst-b"]
    key = demo_env.keys()["digitalize_print"]
    plan = print_plan("inst-b", "prt-d1", mode=DeliveryMode.DIGITALIZE_THEN_PRINT)
    job = server.create_print_job(key, "prt-d1", plan, "inst-d")
    done = server.complete_print_job(job.id, None)
    assert done.state == "done"
    assert server.get_document(key).data == simulated_scan(key)


# -- mail jobs --------------------------------------------------------------------------


def test_photocopy_mail_job_lifecycle(demo_env):
    server = demo_env.docservers["inst-c"]
    key = demo_env.keys()["photocopy_mail"]
    job = server.create_mail_job(key, mail_plan("inst-c"), "inst-d",
                                 "4 Delta Esplanade, Ostrelle", pages=26)
    assert job.state == "queued"
    assert server.ledger() == []  # nothing reproduced yet
    done = server.complete_mail_job(job.id)
    assert done.state == "done" and done.completed is not None
    mail_file = server.spool_dir / "mail" / f"{job.id}.txt"
    assert "4 Delta Esplanade" in mail_file.read_text()
    ledger = server.ledger()
    assert [r["kind"] for r in ledger] == ["billing", "copyright"]


def test_completing_mail_job_twice_rejected_single_record(demo_env):
    server = demo_env.docservers["inst-c"]
    job = server.create_mail_job(
        demo_env.keys()["photocopy_mail"], mail_plan("inst-c"), "inst-d", "addr"
    )
    server.complete_mail_job(job.id)
    with pytest.raises(JobAlreadyDone):
        server.complete_mail_job(job.id)
    assert len([r for r in server.ledger() if r["kind"] == "copyright"]) == 1


def test_jobs_listing_by_state(demo_env):
    server = demo_env.docservers["inst-c"]
    j1 = server.create_mail_job(
        demo_env.keys()["photocopy_mail"], mail_plan("inst-c"), "inst-d", "addr"
    )
    j2 = server.create_mail_job(
        demo_env.keys()["photocopy_mail"], mail_plan("inst-c"), "inst-d", "addr"
    )
    server.complete_mail_job(j1.id)
    assert {j.id for j in server.jobs("queued")} == {j2.id}
    assert {j.id for j in server.jobs("done")} == {j1.id}
    assert len(server.jobs()) == 2


def test_ledger_conservation_after_scripted_scenario(demo_env):
    # several deliveries across servers: done paper jobs == copyright records
    a, b, c = (demo_env.docservers[i] for i in ("inst-a", "inst-b", "inst-c"))
    key_e = demo_env.keys()["electronic_local"]
    a.fetch_or_cache(key_e, resolve_meta(demo_env))  # electronic, no record
    a.create_print_job(key_e, "prt-d1", print_plan("inst-a", "prt-d1"), "inst-d",
                       meta=resolve_meta(demo_env))
    pj = b.create_print_job(
        demo_env.keys()["digitalize_print"], "prt-d1",
        print_plan("inst-b", "prt-d1", mode=DeliveryMode.DIGITALIZE_THEN_PRINT), "inst-d",
    )
    b.complete_print_job(pj.id)
    mj = c.create_mail_job(demo_env.keys()["photocopy_mail"], mail_plan("inst-c"), "inst-d", "addr")
    c.complete_mail_job(mj.id)
    mj2 = c.create_mail_job(demo_env.keys()["photocopy_mail"], mail_plan("inst-c"), "inst-d", "addr")
    # mj2 stays queued: no record for it
    done_paper_jobs = sum(len(s.jobs("done")) for s in (a, b, c))
    copyright_records = sum(
        len([r for r in s.ledger() if r["kind"] == "copyright"]) for s in (a, b, c)
    )
    assert done_paper_jobs == 3
    assert copyright_records == done_paper_jobs
