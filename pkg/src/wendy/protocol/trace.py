"""Newline-delimited trace records."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass(frozen=True)
class TraceRecord:
    time: int
    replica: int
    event: str
    view: int
    block: str | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        rec = {"time": self.time, "replica": self.replica, "event": self.event, "view": self.view, "block": self.block}
        rec.update(self.extra)
        return json.dumps(rec, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> TraceRecord:
        rec = json.loads(line)
        base = {k: rec.pop(k) for k in ("time", "replica", "event", "view", "block")}
        return cls(**base, extra=rec)


def dumps(records) -> str:
    return "".join(r.to_json() + "\n" for r in records)


def loads(text: str) -> list[TraceRecord]:
    return [TraceRecord.from_json(line) for line in text.splitlines() if line.strip()]
