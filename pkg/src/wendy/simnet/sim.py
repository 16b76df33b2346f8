"""Deterministic discrete-event simulator.

Events are ordered by (time, sequence number), so a (config, script, seed)
triple fully determines the run. Links are reliable and FIFO: a message is
never delivered before an earlier message on the same link. After GST every
message between honest replicas arrives within delta of being sent.
"""

from __future__ import annotations

import heapq
import random
from collections import Counter
from dataclasses import dataclass, field

from ..protocol.audit import AuditReport, IncrementalAudit, Violation, safety_audit
from ..protocol.auth import PairingAuth, SymbolicAuth
from ..protocol.replica import STRICT, BlockStore
from ..protocol.trace import TraceRecord, dumps
from ..protocol.types import GENESIS, kind_of
from .adversary import HONEST_SCRIPT, AdversaryScript, build_replica
from .config import NetworkConfig

_DELIVER = 0
_TIMER = 1


class SafetyViolation(RuntimeError):
    def __init__(self, violation: Violation, result: SimResult):
        super().__init__(str(violation))
        self.violation = violation
        self.result = result


@dataclass
class SimResult:
    logs: dict[int, list[str]]
    commit_times: dict[int, int]
    commit_views: dict[int, int]
    block_commit_views: dict[str, int]
    view_changes: int
    message_counts: dict[str, int]
    audit: AuditReport
    trace: list[TraceRecord] = field(repr=False)
    honest: tuple[int, ...] = ()
    block_views: dict[str, int] = field(default_factory=dict)
    end_time: int = 0

    @property
    def committed_heights(self) -> int:
        return max((len(self.logs[r]) - 1 for r in self.honest), default=0)

    def trace_text(self) -> str:
        return dumps(self.trace)

    def first_commit_view_of(self, proposal_view: int) -> int | None:
        """View in which the block first proposed in ``proposal_view`` committed."""
        views = [cv for bid, cv in self.block_commit_views.items() if self.block_views.get(bid) == proposal_view]
        return min(views) if views else None

    def commits_after(self, view: int) -> list[int]:
        return sorted(h for h, v in self.commit_views.items() if v > view)


class _Context:
    def __init__(self, sim: Simulation):
        self.sim = sim

    @property
    def now(self) -> int:
        return self.sim.now

    def send(self, src, dst, msg):
        self.sim.send(src, dst, msg)

    def send_at(self, src, dst, msg, at):
        self.sim.send(src, dst, msg, not_before=at)

    def set_timer(self, rid, view, at):
        self.sim.push(at, _TIMER, (rid, view))

    def trace(self, rid, event, view, block, **extra):
        self.sim.record(rid, event, view, block, extra)

    def on_commit(self, rid, block, view):
        self.sim.on_commit(rid, block, view)

    def on_qc(self, rid, qc):
        self.sim.on_qc(qc)

    def violation(self, rid, detail):
        self.sim.fail(Violation("local-commit", f"replica {rid}: {detail}"))


class Simulation:
    def __init__(
        self,
        config: NetworkConfig,
        script: AdversaryScript = HONEST_SCRIPT,
        mode: str = STRICT,
        *,
        unlock: bool = False,
        auth=None,
        crypto: str = "symbolic",
        abort_on_violation: bool = True,
        chain: int = 2,
    ):
        self.config = config.validate()
        self.script = script.validate(config.n, config.f, config.delta)
        self.mode = mode
        if auth is None:
            auth = PairingAuth(config.n, config.f, seed=config.seed) if crypto == "pairing" else SymbolicAuth(
                config.n, config.f
            )
        self.auth = auth
        self.abort = abort_on_violation
        self.rng = random.Random(config.seed)
        self.now = 0
        self.seq = 0
        self.heap: list = []
        self.link_last: dict[tuple[int, int], int] = {}
        self.records: list[TraceRecord] = []
        self.counts: Counter = Counter()
        self.store = BlockStore()
        self.audit = IncrementalAudit(GENESIS.id)
        self.commit_times: dict[int, int] = {}
        self.commit_views: dict[int, int] = {}
        self.block_commit_views: dict[str, int] = {}
        self.timeout_views: set[int] = set()
        ctx = _Context(self)
        self.replicas = []
        for rid in range(config.n):
            r = build_replica(
                rid,
                self.script.role(rid),
                config.n,
                config.f,
                auth,
                mode=mode,
                unlock=unlock,
                timeout=config.lam,
                horizon=config.max_views,
                chain=chain,
            )
            r.attach(ctx, self.store)
            self.replicas.append(r)

    # Scheduling

    def push(self, at: int, kind: int, payload) -> None:
        self.seq += 1
        heapq.heappush(self.heap, (at, self.seq, kind, payload))

    def latency(self, src: int, dst: int, msg) -> int:
        if src == dst:
            return 0
        for link in self.script.links:
            if link.matches(src, dst, msg):
                return link.ticks
        cfg = self.config
        if self.now < cfg.gst and cfg.pre_gst_max_delay:
            d = self.rng.randint(1, cfg.pre_gst_max_delay)
            return max(1, min(d, cfg.gst + cfg.delta - self.now))
        return cfg.base_delay + (self.rng.randint(0, cfg.jitter) if cfg.jitter else 0)

    def send(self, src: int, dst: int, msg, not_before: int | None = None) -> None:
        sent = self.now if not_before is None else max(self.now, not_before)
        at = sent + self.latency(src, dst, msg)
        for p in self.config.partitions:
            if p.start <= sent < p.end and p.crosses(src, dst):
                at = max(at, p.end)
        link = (src, dst)
        at = max(at, self.link_last.get(link, 0))
        self.link_last[link] = at
        honest_link = not self.replicas[src].faulty and not self.replicas[dst].faulty
        if honest_link and sent >= self.config.gst and at - sent > self.config.delta:
            raise AssertionError(f"post-GST delivery took {at - sent} > delta on {link}")
        self.counts[kind_of(msg)] += 1
        self.push(at, _DELIVER, (dst, msg))

    # Hooks

    def record(self, rid, event, view, block, extra) -> None:
        if event == "timeout" and not self.replicas[rid].faulty and view < self.config.max_views:
            self.timeout_views.add(view)
        self.records.append(TraceRecord(self.now, rid, event, view, block.hex()[:8] if block else None, extra))

    def on_commit(self, rid, block, view) -> None:
        if self.replicas[rid].byzantine:
            return
        self.commit_times.setdefault(block.height, self.now)
        self.commit_views.setdefault(block.height, view)
        key = block.id.hex()
        self.block_commit_views[key] = min(view, self.block_commit_views.get(key, view))
        bad = self.audit.on_commit(rid, block.height, block.id)
        if bad:
            self.fail(bad)

    def on_qc(self, qc) -> None:
        bad = self.audit.on_qc(qc)
        if bad:
            self.fail(bad)

    def fail(self, violation: Violation) -> None:
        if violation not in self.audit.violations:
            self.audit.violations.append(violation)
        if self.abort:
            raise SafetyViolation(violation, self.result())

    # Main loop

    def run(self) -> SimResult:
        for r in self.replicas:
            self.now = 0
            r.start()
        limit = self.config.time_limit
        while self.heap:
            at, _, kind, payload = heapq.heappop(self.heap)
            if at > limit:
                break
            self.now = at
            if kind == _DELIVER:
                dst, msg = payload
                if hasattr(msg, "block") and hasattr(msg.block, "qc"):
                    self.on_qc(msg.block.qc)
                self.replicas[dst].deliver(msg)
            else:
                rid, view = payload
                self.replicas[rid].on_timer(view)
        return self.result()

    def result(self) -> SimResult:
        honest = tuple(r.id for r in self.replicas if not r.byzantine)
        report = AuditReport(list(self.audit.violations))
        final = safety_audit(self.replicas, self.store)
        for v in final.violations:
            if v not in report.violations:
                report.violations.append(v)
        return SimResult(
            logs={r.id: [b.hex() for b in r.committed] for r in self.replicas},
            commit_times=dict(sorted(self.commit_times.items())),
            commit_views=dict(sorted(self.commit_views.items())),
            block_commit_views=self.block_commit_views,
            view_changes=len(self.timeout_views),
            message_counts=dict(sorted(self.counts.items())),
            audit=report,
            trace=self.records,
            honest=honest,
            block_views={bid.hex(): b.view for bid, b in self.store.items()},
            end_time=self.now,
        )


def run(
    config: NetworkConfig,
    script: AdversaryScript = HONEST_SCRIPT,
    mode: str = STRICT,
    *,
    unlock: bool = False,
    crypto: str = "symbolic",
    auth=None,
    abort_on_violation: bool = True,
    chain: int = 2,
) -> SimResult:
    return Simulation(
        config,
        script,
        mode,
        unlock=unlock,
        crypto=crypto,
        auth=auth,
        abort_on_violation=abort_on_violation,
        chain=chain,
    ).run()
