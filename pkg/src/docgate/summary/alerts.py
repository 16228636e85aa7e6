"""Alert subscriptions: which e-mail addresses follow which journal titles.

Subscribers may follow any registered journal, including ones no institution
currently subscribes to; the summary database keeps everything the providers
send, so those alerts still fire. Deleting a subscription deactivates it
rather than erasing it.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, replace
from datetime import datetime
from pathlib import Path
from typing import Callable, Mapping, Optional

from ..policy import Journal
from ..util import format_instant, new_id, parse_instant, utc_now


class UnknownIssn(LookupError):
    pass


class UnknownSubscription(LookupError):
    pass


@dataclass(frozen=True)
class AlertSubscription:
    id: str
    email: str
    issns: tuple[str, ...]
    created: datetime
    active: bool = True

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "email": self.email,
            "issns": list(self.issns),
            "created": format_instant(self.created),
            "active": self.active,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AlertSubscription":
        return cls(
            id=d["id"],
            email=d["email"],
            issns=tuple(d["issns"]),
            created=parse_instant(d["created"]),
            active=d["active"],
        )


class AlertStore:
    def __init__(self, path: Path, journals: Mapping[str, Journal]):
        self.path = Path(path)
        self.journals = journals
        self._lock = threading.Lock()
        self._subs: dict[str, AlertSubscription] = {}
        if self.path.exists():
            for d in json.loads(self.path.read_text("utf-8")):
                sub = AlertSubscription.from_dict(d)
                self._subs[sub.id] = sub

    def _save(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        data = [s.to_dict() for s in self._subs.values()]
        self.path.write_text(json.dumps(data, indent=1, sort_keys=True), "utf-8")

    def create(
        self, email: str, issns: list[str], clock: Callable[[], datetime] = utc_now
    ) -> AlertSubscription:
        if not issns:
            raise UnknownIssn("a subscription needs at least one journal")
        unknown = [i for i in issns if i not in self.journals]
        if unknown:
            raise UnknownIssn(f"not registered journals: {', '.join(unknown)}")
        sub = AlertSubscription(
            id=new_id("alert"), email=email, issns=tuple(issns), created=clock()
        )
        with self._lock:
            self._subs[sub.id] = sub
            self._save()
        return sub

    def deactivate(self, sub_id: str) -> AlertSubscription:
        with self._lock:
            sub = self._subs.get(sub_id)
            if sub is None:
                raise UnknownSubscription(sub_id)
            sub = replace(sub, active=False)
            self._subs[sub_id] = sub
            self._save()
        return sub

    def list(self, email: Optional[str] = None, active_only: bool = True) -> list[AlertSubscription]:
        subs = list(self._subs.values())
        if email is not None:
            subs = [s for s in subs if s.email == email]
        if active_only:
            subs = [s for s in subs if s.active]
        subs.sort(key=lambda s: (s.created, s.id))
        return subs

    def active(self) -> list[AlertSubscription]:
        return self.list(active_only=True)
