"""Safety checking over honest committed logs and certificate uniqueness."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str
    height: int | None = None
    view: int | None = None

    def __str__(self):
        where = []
        if self.height is not None:
            where.append(f"height {self.height}")
        if self.view is not None:
            where.append(f"view {self.view}")
        return f"{self.kind}: {self.detail}" + (f" ({', '.join(where)})" if where else "")


@dataclass
class AuditReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def check_logs(logs: dict[int, list[bytes]]) -> list[Violation]:
    """Pairwise prefix compatibility of committed logs (height-indexed)."""
    out = []
    ids = sorted(logs)
    for i, a in enumerate(ids):
        for b in ids[i + 1 :]:
            la, lb = logs[a], logs[b]
            for h in range(min(len(la), len(lb))):
                if la[h] != lb[h]:
                    out.append(
                        Violation(
                            "conflicting-commit",
                            f"replicas {a} and {b} committed {la[h].hex()[:8]} vs {lb[h].hex()[:8]}",
                            height=h,
                        )
                    )
                    break
    return out


def check_qcs(qcs: Iterable) -> list[Violation]:
    """At most one certified block per view."""
    seen: dict[int, bytes] = {}
    out = []
    for qc in qcs:
        if qc.view == 0:
            continue
        prev = seen.setdefault(qc.view, qc.block)
        if prev != qc.block:
            out.append(
                Violation(
                    "duplicate-qc",
                    f"blocks {prev.hex()[:8]} and {qc.block.hex()[:8]} both certified",
                    view=qc.view,
                )
            )
    return out


def safety_audit(replicas, store=None, extra_qcs: Iterable = ()) -> AuditReport:
    """Audit the honest replicas' committed logs and every known certificate."""
    honest = [r for r in replicas if not r.byzantine]
    report = AuditReport()
    report.violations += check_logs({r.id: r.committed for r in honest})
    qcs = list(extra_qcs)
    if store is not None:
        qcs += [b.qc for b in store.values()]
    for r in replicas:
        qcs += list(r.formed.values())
    report.violations += check_qcs(qcs)
    return report


class IncrementalAudit:
    """Event-by-event version of ``safety_audit`` used by the simulator."""

    def __init__(self, genesis: bytes):
        self.canonical: list[bytes] = [genesis]
        self.qc_views: dict[int, bytes] = {}
        self.violations: list[Violation] = []

    def on_commit(self, replica: int, height: int, block_id: bytes) -> Violation | None:
        if height < len(self.canonical):
            if self.canonical[height] != block_id:
                v = Violation(
                    "conflicting-commit",
                    f"replica {replica} committed {block_id.hex()[:8]}, another honest replica "
                    f"committed {self.canonical[height].hex()[:8]}",
                    height=height,
                )
                self.violations.append(v)
                return v
            return None
        if height == len(self.canonical):
            self.canonical.append(block_id)
            return None
        raise AssertionError("commits must arrive in height order")

    def on_qc(self, qc) -> Violation | None:
        if not qc.view:
            return None
        prev = self.qc_views.setdefault(qc.view, qc.block)
        if prev == qc.block:
            return None
        v = Violation(
            "duplicate-qc", f"blocks {prev.hex()[:8]} and {qc.block.hex()[:8]} both certified", view=qc.view
        )
        self.violations.append(v)
        return v
