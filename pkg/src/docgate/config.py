"""Configuration loading.

One JSON file describes the whole deployment: journals, institutions with
their address ranges and per-category rights, subscriptions, the fee
schedule, providers, and the listen addresses and data directories of every
service. Services load it at startup; administrative updates mean editing
the file and restarting (each policy snapshot is immutable in memory).
"""

from __future__ import annotations

import ipaddress
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .ingest.adapters import ADAPTERS, ProviderConfig
from .policy import (
    Consortium,
    FeeSchedule,
    Format,
    Institution,
    Journal,
    PolicyConfigError,
    ServiceRights,
    Subscription,
)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ServiceEndpoint:
    listen: str  # host:port
    url: str

    @property
    def host(self) -> str:
        return self.listen.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen.rsplit(":", 1)[1])


@dataclass(frozen=True)
class SummarySettings:
    endpoint: ServiceEndpoint
    data_dir: Path
    mail_sink: str = "log"  # "spool" | "log" | "memory"
    mail_spool_dir: Optional[Path] = None


@dataclass(frozen=True)
class BinderSettings:
    endpoint: ServiceEndpoint
    editors: dict = field(default_factory=dict)  # editor id -> resolver spec


@dataclass(frozen=True)
class DocServerSettings:
    institution: str
    endpoint: ServiceEndpoint
    data_dir: Path


@dataclass(frozen=True)
class AppConfig:
    path: Path
    consortium: Consortium
    fees: FeeSchedule
    admin_token: str
    trusted_proxies: tuple[str, ...]
    providers: dict[str, ProviderConfig]
    summary: SummarySettings
    binder: BinderSettings
    docservers: dict[str, DocServerSettings]

    def provider(self, provider_id: str) -> ProviderConfig:
        try:
            return self.providers[provider_id]
        except KeyError:
            raise ConfigError(f"no provider named {provider_id!r}") from None


def _rights(raw: dict, where: str) -> ServiceRights:
    known = {
        "navigation_browsing",
        "alert_service",
        "photocopy_service",
        "digitalization",
        "electronic_access",
    }
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"{where}: unknown rights flags {sorted(unknown)}")
    return ServiceRights(**{k: bool(v) for k, v in raw.items()})


def _endpoint(raw: dict, where: str) -> ServiceEndpoint:
    listen = raw.get("listen")
    if not listen or ":" not in listen:
        raise ConfigError(f"{where}: 'listen' must be host:port")
    return ServiceEndpoint(listen=listen, url=raw.get("url") or f"http://{listen}")


def _resolve_dir(raw: str, base: Path) -> Path:
    p = Path(raw)
    return p if p.is_absolute() else (base / p).resolve()


def load_config(path: Path | str) -> AppConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text("utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    base = path.parent.resolve()

    try:
        journals = [
            Journal(
                issn=j["issn"],
                title=j["title"],
                domains=tuple(j["domains"]),
                editor=j["editor"],
            )
            for j in raw.get("journals", [])
        ]
        institutions = []
        for i in raw.get("institutions", []):
            institutions.append(
                Institution(
                    id=i["id"],
                    name=i.get("name", i["id"]),
                    ip_ranges=tuple(ipaddress.ip_network(r) for r in i.get("ip_ranges", [])),
                    can_digitalize=bool(i.get("can_digitalize", False)),
                    authorized_printers=tuple(i.get("authorized_printers", [])),
                    document_server=i.get("document_server"),
                    postal_address=i.get("postal_address", ""),
                    rights_by_category={
                        cat: _rights(flags, f"institution {i['id']} category {cat}")
                        for cat, flags in i.get("rights_by_category", {}).items()
                    },
                )
            )
        subscriptions = [
            Subscription(
                institution=s["institution"], issn=s["issn"], format=Format(s["format"])
            )
            for s in raw.get("subscriptions", [])
        ]
        consortium = Consortium(institutions, journals, subscriptions)
    except (KeyError, TypeError, ValueError, PolicyConfigError) as exc:
        raise ConfigError(f"bad consortium section: {exc}") from exc

    providers = {}
    for p in raw.get("providers", []):
        adapter = p.get("adapter", "")
        if adapter not in ADAPTERS:
            raise ConfigError(f"provider {p.get('id')!r}: unknown adapter {adapter!r}")
        title_filter = p.get("title_filter")
        providers[p["id"]] = ProviderConfig(
            id=p["id"],
            adapter=adapter,
            title_filter=None if title_filter in (None, "accept-all") else frozenset(title_filter),
        )

    summary_raw = raw.get("summary_server", {})
    if "data_dir" not in summary_raw:
        raise ConfigError("summary_server.data_dir is required")
    mail_raw = summary_raw.get("mail_sink", {})
    summary = SummarySettings(
        endpoint=_endpoint(summary_raw, "summary_server"),
        data_dir=_resolve_dir(summary_raw["data_dir"], base),
        mail_sink=mail_raw.get("kind", "log"),
        mail_spool_dir=(
            _resolve_dir(mail_raw["directory"], base) if mail_raw.get("directory") else None
        ),
    )

    binder_raw = raw.get("binder", {})
    binder = BinderSettings(
        endpoint=_endpoint(binder_raw, "binder"),
        editors=binder_raw.get("editors", {}),
    )

    docservers = {}
    for d in raw.get("docservers", []):
        inst_id = d["institution"]
        if inst_id not in consortium.institutions:
            raise ConfigError(f"docserver names unknown institution {inst_id!r}")
        docservers[inst_id] = DocServerSettings(
            institution=inst_id,
            endpoint=_endpoint(d, f"docserver {inst_id}"),
            data_dir=_resolve_dir(d["data_dir"], base),
        )

    return AppConfig(
        path=path,
        consortium=consortium,
        fees=FeeSchedule.from_dict(raw.get("fees", {})),
        admin_token=raw.get("admin_token", ""),
        trusted_proxies=tuple(raw.get("trusted_proxies", [])),
        providers=providers,
        summary=summary,
        binder=binder,
        docservers=docservers,
    )
