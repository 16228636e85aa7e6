"""Consortium domain model, IP-based affiliation, and the delivery decision engine.

Every article request is routed to exactly one delivery mode:

* the requester's own institution subscribes to the electronic version and
  the requester may use electronic access: the document goes straight to
  the workstation (local-mode access);
* another institution subscribes to the electronic version: that institution
  prints it on an authorized printer at the requester's site;
* an institution holds the paper version and offers digitalization: the
  article is scanned, stored, and printed at the requester's site;
* an institution holds the paper version: classical photocopy, sent by
  postal mail;
* nobody can supply it: unavailable.

Cross-institution delivery is always on paper; every paper reproduction owes
a copyright payment record, and cross-institution work is billed between the
two institutions.
"""

from __future__ import annotations

import ipaddress
from dataclasses import dataclass, field
from datetime import datetime
from decimal import Decimal
from enum import Enum
from typing import Callable, Iterable, Mapping, Optional, Sequence

from . import issn as issn_mod
from .util import format_instant, new_id, utc_now

DOMAINS = ("human-sciences", "exact-sciences")


class Format(str, Enum):
    ELECTRONIC = "Electronic"
    PAPER = "Paper"


class DeliveryMode(str, Enum):
    ELECTRONIC_TO_WORKSTATION = "ElectronicToWorkstation"
    PRINT_AT_AUTHORIZED_PRINTER = "PrintAtAuthorizedPrinter"
    DIGITALIZE_THEN_PRINT = "DigitalizeThenPrint"
    PHOTOCOPY_POSTAL_MAIL = "PhotocopyPostalMail"
    UNAVAILABLE = "Unavailable"


PAPER_MODES = (
    DeliveryMode.PRINT_AT_AUTHORIZED_PRINTER,
    DeliveryMode.DIGITALIZE_THEN_PRINT,
    DeliveryMode.PHOTOCOPY_POSTAL_MAIL,
)


class AccessClass(str, Enum):
    LOCAL = "LocalMode"
    SHARED = "SharedMode"
    NONE = "None"


class DestinationKind(str, Enum):
    WORKSTATION = "Workstation"
    PRINTER = "Printer"
    POSTAL = "PostalAddress"


@dataclass(frozen=True)
class Destination:
    kind: DestinationKind
    value: Optional[str] = None  # printer id or postal address

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "value": self.value}

    @classmethod
    def from_dict(cls, d: Mapping) -> "Destination":
        return cls(DestinationKind(d["kind"]), d.get("value"))


WORKSTATION = Destination(DestinationKind.WORKSTATION)


@dataclass(frozen=True)
class ServiceRights:
    """Per user-category service flags.

    Navigation is implied by any other right: a category allowed to use a
    document service can always at least browse.
    """

    navigation_browsing: bool = False
    alert_service: bool = False
    photocopy_service: bool = False
    digitalization: bool = False
    electronic_access: bool = False

    def __post_init__(self):
        if (
            self.alert_service
            or self.photocopy_service
            or self.digitalization
            or self.electronic_access
        ) and not self.navigation_browsing:
            object.__setattr__(self, "navigation_browsing", True)

    @classmethod
    def all_services(cls) -> "ServiceRights":
        return cls(True, True, True, True, True)

    @classmethod
    def navigation_only(cls) -> "ServiceRights":
        return cls(navigation_browsing=True)

    def to_dict(self) -> dict:
        return {
            "navigation_browsing": self.navigation_browsing,
            "alert_service": self.alert_service,
            "photocopy_service": self.photocopy_service,
            "digitalization": self.digitalization,
            "electronic_access": self.electronic_access,
        }


@dataclass(frozen=True)
class Journal:
    issn: str
    title: str
    domains: tuple[str, ...]
    editor: str

    def __post_init__(self):
        if not issn_mod.is_valid(self.issn):
            raise ValueError(f"invalid ISSN {self.issn!r}")
        if not (1 <= len(self.domains) <= 2) or not set(self.domains) <= set(DOMAINS):
            raise ValueError(f"journal {self.issn}: domains must be 1 or 2 of {DOMAINS}")


@dataclass(frozen=True)
class Institution:
    id: str
    name: str
    ip_ranges: tuple[ipaddress.IPv4Network | ipaddress.IPv6Network, ...]
    can_digitalize: bool = False
    authorized_printers: tuple[str, ...] = ()
    document_server: Optional[str] = None  # base URL, None when the site runs none
    postal_address: str = ""
    rights_by_category: Mapping[str, ServiceRights] = field(default_factory=dict)

    def contains_ip(self, ip: ipaddress.IPv4Address | ipaddress.IPv6Address) -> bool:
        return any(ip in net for net in self.ip_ranges)


@dataclass(frozen=True)
class Subscription:
    institution: str
    issn: str
    format: Format


@dataclass(frozen=True)
class UserContext:
    source_ip: str
    category: str
    email: Optional[str] = None


class UnknownCategory(LookupError):
    """The user's claimed category is not configured at their institution."""


class RightsDenied(PermissionError):
    """A delivery route exists but the requester's category may not use it."""


class PolicyConfigError(ValueError):
    """The consortium configuration violates a structural invariant."""


@dataclass(frozen=True)
class DeliveryPlan:
    mode: DeliveryMode
    source_institution: Optional[str]
    destination: Destination
    delivery_format: Optional[Format]
    access_class: AccessClass

    @classmethod
    def unavailable(cls) -> "DeliveryPlan":
        return cls(DeliveryMode.UNAVAILABLE, None, WORKSTATION, None, AccessClass.NONE)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "source_institution": self.source_institution,
            "destination": self.destination.to_dict(),
            "delivery_format": self.delivery_format.value if self.delivery_format else None,
            "access_class": self.access_class.value,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "DeliveryPlan":
        return cls(
            mode=DeliveryMode(d["mode"]),
            source_institution=d.get("source_institution"),
            destination=Destination.from_dict(d["destination"]),
            delivery_format=Format(d["delivery_format"]) if d.get("delivery_format") else None,
            access_class=AccessClass(d["access_class"]),
        )


class Consortium:
    """Immutable snapshot of institutions, journals, and subscriptions.

    All policy operations are pure functions over a snapshot, so request
    handlers may share one freely across threads; configuration updates
    swap in a whole new snapshot.
    """

    def __init__(
        self,
        institutions: Sequence[Institution],
        journals: Sequence[Journal],
        subscriptions: Sequence[Subscription],
    ):
        self.institutions: dict[str, Institution] = {}
        for inst in institutions:
            if inst.id in self.institutions:
                raise PolicyConfigError(f"duplicate institution id {inst.id!r}")
            self.institutions[inst.id] = inst
        self.journals: dict[str, Journal] = {}
        for j in journals:
            if j.issn in self.journals:
                raise PolicyConfigError(f"duplicate journal {j.issn}")
            self.journals[j.issn] = j
        self.subscriptions: tuple[Subscription, ...] = tuple(subscriptions)
        self._check_invariants()
        self._subs_index: dict[tuple[str, Format], list[str]] = {}
        for sub in self.subscriptions:
            self._subs_index.setdefault((sub.issn, sub.format), []).append(sub.institution)
        for ids in self._subs_index.values():
            ids.sort()

    def _check_invariants(self) -> None:
        insts = list(self.institutions.values())
        for i, a in enumerate(insts):
            for b in insts[i + 1 :]:
                for na in a.ip_ranges:
                    for nb in b.ip_ranges:
                        if na.version == nb.version and na.overlaps(nb):
                            raise PolicyConfigError(
                                f"ip ranges overlap: {a.id}:{na} vs {b.id}:{nb}"
                            )
        seen = set()
        for sub in self.subscriptions:
            key = (sub.institution, sub.issn, sub.format)
            if key in seen:
                raise PolicyConfigError(f"duplicate subscription {key}")
            seen.add(key)
            if sub.institution not in self.institutions:
                raise PolicyConfigError(f"subscription names unknown institution {sub.institution!r}")
            if sub.issn not in self.journals:
                raise PolicyConfigError(f"subscription names unknown journal {sub.issn!r}")

    def institution(self, inst_id: str) -> Institution:
        return self.institutions[inst_id]

    def journal(self, j_issn: str) -> Optional[Journal]:
        return self.journals.get(j_issn)

    def subscribers(self, j_issn: str, fmt: Format) -> list[str]:
        """Institution ids holding the given subscription, sorted by id."""
        return list(self._subs_index.get((j_issn, fmt), ()))

    def subscribes(self, inst_id: str, j_issn: str, fmt: Format) -> bool:
        return inst_id in self._subs_index.get((j_issn, fmt), ())

    def offers_digitalization(self, inst_id: str) -> bool:
        """An institution offers digitalization when at least one of its user
        categories is granted the digitalization service."""
        inst = self.institutions[inst_id]
        return any(r.digitalization for r in inst.rights_by_category.values())


def resolve_institution(
    ip: str | ipaddress.IPv4Address | ipaddress.IPv6Address,
    institutions: Iterable[Institution],
) -> Optional[Institution]:
    """Map a source address to its institution, or None for unaffiliated visitors.

    Ranges of distinct institutions are disjoint, so the first match is the
    only match.
    """
    addr = ipaddress.ip_address(ip) if isinstance(ip, str) else ip
    for inst in institutions:
        if inst.contains_ip(addr):
            return inst
    return None


def rights_for(user: UserContext, inst: Institution) -> ServiceRights:
    """The configured flags for the user's category, verbatim."""
    try:
        return inst.rights_by_category[user.category]
    except KeyError:
        raise UnknownCategory(
            f"category {user.category!r} is not configured at {inst.id}"
        ) from None


def plan_delivery(
    requester_inst: Optional[Institution],
    rights: ServiceRights,
    j_issn: str,
    consortium: Consortium,
) -> DeliveryPlan:
    """Select the delivery route for one article request.

    Routes are tried in a fixed priority order (electronic local, then print
    of another site's electronic copy, then digitalize-and-print, then
    photocopy by post); the first applicable one wins, and ties between
    candidate source institutions go to the lowest institution id.

    Raises RightsDenied when a route was blocked only by the requester's
    category flags and nothing below it applied. Returns the Unavailable
    plan when no institution can supply the article at all, or when the
    requester is unaffiliated (paper delivery needs a home site to deliver
    to).
    """
    if requester_inst is None:
        return DeliveryPlan.unavailable()

    denied = False
    printers = requester_inst.authorized_printers

    if consortium.subscribes(requester_inst.id, j_issn, Format.ELECTRONIC):
        if rights.electronic_access:
            return DeliveryPlan(
                mode=DeliveryMode.ELECTRONIC_TO_WORKSTATION,
                source_institution=requester_inst.id,
                destination=WORKSTATION,
                delivery_format=Format.ELECTRONIC,
                access_class=AccessClass.LOCAL,
            )
        denied = True

    remote_electronic = [
        i for i in consortium.subscribers(j_issn, Format.ELECTRONIC) if i != requester_inst.id
    ]
    if remote_electronic and printers:
        return DeliveryPlan(
            mode=DeliveryMode.PRINT_AT_AUTHORIZED_PRINTER,
            source_institution=remote_electronic[0],
            destination=Destination(DestinationKind.PRINTER, printers[0]),
            delivery_format=Format.PAPER,
            access_class=AccessClass.SHARED,
        )

    digitalizers = [
        i
        for i in consortium.subscribers(j_issn, Format.PAPER)
        if consortium.institution(i).can_digitalize and consortium.offers_digitalization(i)
    ]
    if digitalizers and printers:
        return DeliveryPlan(
            mode=DeliveryMode.DIGITALIZE_THEN_PRINT,
            source_institution=digitalizers[0],
            destination=Destination(DestinationKind.PRINTER, printers[0]),
            delivery_format=Format.PAPER,
            access_class=AccessClass.SHARED,
        )

    paper_holders = consortium.subscribers(j_issn, Format.PAPER)
    if paper_holders:
        if rights.photocopy_service:
            return DeliveryPlan(
                mode=DeliveryMode.PHOTOCOPY_POSTAL_MAIL,
                source_institution=paper_holders[0],
                destination=Destination(DestinationKind.POSTAL, requester_inst.postal_address),
                delivery_format=Format.PAPER,
                access_class=AccessClass.SHARED,
            )
        denied = True

    if denied:
        raise RightsDenied(
            f"{requester_inst.id}: a route exists for {j_issn} but the category's flags forbid it"
        )
    return DeliveryPlan.unavailable()


@dataclass(frozen=True)
class FeeSchedule:
    """Flat per-mode billing fees plus a per-page copyright fee; all default
    to zero so record plumbing works before any tariff is negotiated."""

    billing_by_mode: Mapping[str, Decimal] = field(default_factory=dict)
    copyright_per_page: Decimal = Decimal("0")

    def billing_fee(self, mode: DeliveryMode) -> Decimal:
        return Decimal(self.billing_by_mode.get(mode.value, Decimal("0")))

    def copyright_fee(self, pages: int) -> Decimal:
        return self.copyright_per_page * pages

    @classmethod
    def from_dict(cls, d: Mapping) -> "FeeSchedule":
        billing = {k: Decimal(str(v)) for k, v in d.get("billing_by_mode", {}).items()}
        return cls(billing, Decimal(str(d.get("copyright_per_page", "0"))))

    def to_dict(self) -> dict:
        return {
            "billing_by_mode": {k: str(v) for k, v in self.billing_by_mode.items()},
            "copyright_per_page": str(self.copyright_per_page),
        }


@dataclass(frozen=True)
class BillingRecord:
    id: str
    timestamp: datetime
    source_institution: str
    requesting_institution: str
    article: str
    mode: DeliveryMode
    fee: Decimal

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "timestamp": format_instant(self.timestamp),
            "source_institution": self.source_institution,
            "requesting_institution": self.requesting_institution,
            "article": self.article,
            "mode": self.mode.value,
            "fee": str(self.fee),
        }


@dataclass(frozen=True)
class CopyrightPaymentRecord:
    id: str
    timestamp: datetime
    article: str
    paying_institution: str
    fee: Decimal

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "timestamp": format_instant(self.timestamp),
            "article": self.article,
            "paying_institution": self.paying_institution,
            "fee": str(self.fee),
        }


def emit_records(
    plan: DeliveryPlan,
    requester_inst: Institution,
    article_key: str,
    fees: FeeSchedule,
    pages: int = 1,
    clock: Callable[[], datetime] = utc_now,
) -> tuple[Optional[BillingRecord], Optional[CopyrightPaymentRecord]]:
    """Accounting records for one executed delivery.

    A billing record traces cross-institution work; a copyright payment
    record is owed for every paper reproduction, even within one
    institution. Electronic delivery to a member of the subscribing
    institution produces neither (those terms were settled with the editor
    at subscription time).
    """
    if plan.mode == DeliveryMode.UNAVAILABLE:
        raise ValueError("no records for an unavailable plan")
    now = clock()
    billing = None
    if plan.source_institution != requester_inst.id:
        billing = BillingRecord(
            id=new_id("bill"),
            timestamp=now,
            source_institution=plan.source_institution or "",
            requesting_institution=requester_inst.id,
            article=article_key,
            mode=plan.mode,
            fee=fees.billing_fee(plan.mode),
        )
    copyright_rec = None
    if plan.delivery_format == Format.PAPER:
        copyright_rec = CopyrightPaymentRecord(
            id=new_id("cfc"),
            timestamp=now,
            article=article_key,
            paying_institution=requester_inst.id,
            fee=fees.copyright_fee(pages),
        )
    return billing, copyright_rec
