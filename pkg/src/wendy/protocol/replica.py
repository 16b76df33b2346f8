"""Chained two-phase replica with strict or relaxed commit and optional unlocking.

Votes for a block proposed in view v are labeled v+1 and sent to the leader
of v+1, which turns 2f+1 of them into the certificate it proposes with; the
voter moves to view v+1 and waits there for that proposal. A
replica keeps one certificate, ``qc_high``, which is both its highest known
certificate and its lock.

Strict mode commits the parent certificate's block when two certificates in
consecutive views chain. Relaxed mode ranks certificates by their promoted
view (a no-commit proof attached at a view change lifts a certificate to
that view) and also lets a new leader certify a block from votes piggybacked
on NewView messages.
"""

from __future__ import annotations

import hashlib
from collections import defaultdict
from dataclasses import dataclass, field

from .. import nocommit
from .types import GENESIS, GENESIS_QC, QC, Block, Nack, NewView, NoCommit, Proposal, UpdateView, Vote

STRICT = "strict"
RELAXED = "relaxed"
MODES = (STRICT, RELAXED)


def leader_of(view: int, n: int) -> int:
    return view % n


def make_payload(replica: int, view: int, variant: int = 0) -> bytes:
    return hashlib.sha256(f"payload|{replica}|{view}|{variant}".encode()).digest()[:16]


class BlockStore(dict):
    """Content-addressed block store shared by every replica in a run."""

    def __init__(self):
        super().__init__()
        self[GENESIS.id] = GENESIS

    def add(self, block: Block) -> None:
        self.setdefault(block.id, block)

    def extends(self, block_id: bytes, ancestor_id: bytes) -> bool:
        anc = self.get(ancestor_id)
        cur = self.get(block_id)
        if anc is None or cur is None:
            return False
        while cur.height > anc.height:
            cur = self.get(cur.parent)
            if cur is None:
                return False
        return cur.id == anc.id

    def chain_to(self, block_id: bytes, height: int) -> list[Block]:
        """Ancestors of ``block_id`` with height above ``height``, oldest first."""
        out = []
        cur = self[block_id]
        while cur.height > height:
            out.append(cur)
            cur = self[cur.parent]
        out.append(cur)
        return out[::-1]


def commit_target(qc2: QC, store: BlockStore, mode: str, chain: int = 2) -> bytes | None:
    """Block committed by seeing ``qc2``, if its chain satisfies the commit rule.

    The strict rule needs ``chain`` certificates in consecutive views; the
    relaxed rule always uses two.
    """
    x = store.get(qc2.block)
    if x is None or x.height == 0:
        return None
    qc1 = x.qc
    if qc1.view == 0:
        return None
    if mode != STRICT:
        return qc1.block if qc1.eff == x.view and qc2.view > x.view else None
    top = qc2
    for _ in range(chain - 1):
        x = store.get(top.block)
        if x is None or x.height == 0 or x.qc.view == 0 or top.view != x.qc.view + 1:
            return None
        top = x.qc
    return top.block


@dataclass
class Proposed:
    qc: QC
    basis: tuple[NewView, ...] | None
    block: Block
    nocommit_sent: set = field(default_factory=set)


class Replica:
    byzantine = False
    faulty = False

    def __init__(
        self,
        rid: int,
        n: int,
        f: int,
        auth,
        *,
        mode: str = STRICT,
        unlock: bool = False,
        timeout: int = 80,
        horizon: int | None = None,
        buffer_cap: int = 1024,
        chain: int = 2,
    ):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        if chain < 2:
            raise ValueError("commit chain needs at least two certificates")
        self.id = rid
        self.n = n
        self.f = f
        self.q = 2 * f + 1
        self.auth = auth
        self.mode = mode
        self.unlock = unlock
        self.timeout = timeout
        self.horizon = horizon
        self.buffer_cap = buffer_cap
        self.chain = chain
        self.ctx = None
        self.store: BlockStore | None = None

        self.view = 0
        self.qc_high = GENESIS_QC
        self.voted: dict[int, bytes] = {}
        self.last_voted: bytes | None = None
        self.committed: list[bytes] = [GENESIS.id]
        self.votes: dict = defaultdict(dict)
        self.formed: dict[int, QC] = {}
        self.newviews: dict[int, dict[int, NewView]] = defaultdict(dict)
        self.proposed: dict[int, Proposed] = {}
        self.sent_newview: set[int] = set()
        self.sent_update: set[int] = set()
        self.buffer: list = []
        self.pending: dict[int, Block] = {}

    # Plumbing

    def leader(self, view: int) -> int:
        return leader_of(view, self.n)

    def rank(self, qc: QC) -> int:
        return qc.eff if self.mode == RELAXED else qc.view

    def beyond_horizon(self, view: int) -> bool:
        return self.horizon is not None and view > self.horizon

    def emit(self, dst: int, msg) -> None:
        self.ctx.send(self.id, dst, msg)

    def broadcast(self, msg) -> None:
        for dst in range(self.n):
            self.emit(dst, msg)

    def trace(self, event: str, view: int, block: bytes | None = None, **extra) -> None:
        self.ctx.trace(self.id, event, view, block, **extra)

    def attach(self, ctx, store: BlockStore) -> None:
        self.ctx = ctx
        self.store = store

    def start(self) -> None:
        self.enter_view(1, "start")

    # View management

    def enter_view(self, v: int, cause: str) -> None:
        if v <= self.view or self.beyond_horizon(v):
            return
        self.view = v
        self.ctx.set_timer(self.id, v, self.ctx.now + self.timeout)
        self.trace("enter", v, cause=cause)
        held, self.buffer = self.buffer, []
        for msg in held:
            if msg.view > self.view:
                self.buffer.append(msg)
            elif msg.view == self.view:
                self.deliver(msg)
        self.try_propose(v)

    def on_timer(self, v: int) -> None:
        if v != self.view:
            return
        self.trace("timeout", v)
        if self.beyond_horizon(v + 1):
            return
        self.send_newview(v + 1)
        self.enter_view(v + 1, "timeout")

    def send_newview(self, v: int) -> None:
        if v in self.sent_newview or self.beyond_horizon(v):
            return
        lock = self.rank(self.qc_high)
        if lock >= v:
            return
        self.sent_newview.add(v)
        claim, share = self.auth.newview_share(self.id, v, lock)
        vote = None
        if self.mode == RELAXED and self.last_voted is not None:
            # Re-sending an identical vote for a label is harmless; a different block is not.
            if self.voted.get(v, self.last_voted) == self.last_voted and self.store.extends(
                self.last_voted, self.qc_high.block
            ):
                self.voted[v] = self.last_voted
                vote = Vote(self.id, v, self.last_voted, self.auth.sign_vote(self.id, self.last_voted, v))
        self.trace("newview", v, self.qc_high.block, lock=lock)
        self.emit(self.leader(v), NewView(self.id, v, self.qc_high, claim, share, vote))

    def hold(self, msg) -> None:
        if len(self.buffer) < self.buffer_cap:
            self.buffer.append(msg)

    # Dispatch

    def deliver(self, msg) -> None:
        if isinstance(msg, Proposal):
            self.on_proposal(msg)
        elif isinstance(msg, Vote):
            self.on_vote(msg)
        elif isinstance(msg, NewView):
            self.on_newview(msg)
        elif isinstance(msg, UpdateView):
            self.on_updateview(msg)
        elif isinstance(msg, Nack):
            self.on_nack(msg)
        elif isinstance(msg, NoCommit):
            self.on_nocommit(msg)
        else:
            raise TypeError(f"unknown message {msg!r}")

    # Certificates and commits

    def valid_block(self, b: Block, v: int) -> bool:
        if b.view != v or b.parent != b.qc.block:
            return False
        parent = self.store.get(b.parent)
        if parent is None or b.height != parent.height + 1 or parent.view >= v:
            return False
        if self.rank(b.qc) > v or b.qc.view > v:
            return False
        return self.auth.verify_qc(b.qc)

    def update_lock(self, qc: QC) -> None:
        if self.rank(qc) > self.rank(self.qc_high):
            self.qc_high = qc

    def observe_qc(self, qc: QC) -> None:
        target = commit_target(qc, self.store, self.mode, self.chain)
        if target is not None:
            self.commit(target, qc.view)

    def commit(self, block_id: bytes, view: int) -> None:
        block = self.store[block_id]
        tip = len(self.committed) - 1
        if block.height <= tip:
            if self.committed[block.height] != block_id:
                self.ctx.violation(self.id, f"conflicting commit at height {block.height} in view {view}")
            return
        chain = self.store.chain_to(block_id, tip)
        if chain[0].id != self.committed[-1]:
            self.ctx.violation(self.id, f"commit at height {block.height} does not extend height {tip}")
            return
        for b in chain[1:]:
            self.committed.append(b.id)
            self.trace("commit", view, b.id, height=b.height)
            self.ctx.on_commit(self.id, b, view)

    # Replica side

    def on_proposal(self, m: Proposal) -> None:
        v, b = m.view, m.block
        if m.sender != self.leader(v) or v < self.view:
            return
        if not self.valid_block(b, v):
            self.trace("reject-block", v, b.id)
            return
        self.store.add(b)
        self.observe_qc(b.qc)
        if v > self.view:
            if b.qc.view == v:
                self.enter_view(v, "proposal")
            else:
                self.hold(m)
                return
        if v == self.view:
            self.consider(b)

    def safe(self, b: Block) -> bool:
        return self.rank(b.qc) > self.rank(self.qc_high) or self.store.extends(b.id, self.qc_high.block)

    def consider(self, b: Block) -> None:
        label = b.view + 1
        if label in self.voted:
            return
        if self.safe(b):
            self.cast_vote(b)
        elif self.unlock:
            self.pending[b.view] = b
            self.trace("nack", b.view, b.id, lock=self.rank(self.qc_high))
            self.emit(self.leader(b.view), Nack(self.id, b.view, self.qc_high))
        else:
            self.trace("refuse", b.view, b.id, lock=self.rank(self.qc_high))

    def cast_vote(self, b: Block) -> None:
        label = b.view + 1
        self.voted[label] = b.id
        self.last_voted = b.id
        self.update_lock(b.qc)
        self.trace("vote", b.view, b.id)
        self.emit(self.leader(label), Vote(self.id, label, b.id, self.auth.sign_vote(self.id, b.id, label)))
        # Having voted, the replica waits in the collector's view for its proposal.
        self.enter_view(label, "vote")

    def on_nocommit(self, m: NoCommit) -> None:
        v, b = m.view, m.block
        if not self.unlock or m.sender != self.leader(v):
            return
        if v > self.view:
            self.hold(m)
            return
        if v < self.view or (v + 1) in self.voted:
            return
        if not self.valid_block(b, v):
            return
        verdict = self.auth.check_unlock(m.proof, self.rank(self.qc_high), v)
        if not verdict:
            self.trace("unlock-reject", v, b.id, reason=verdict.reason.value)
            return
        self.store.add(b)
        self.trace("unlock", v, b.id, lock=self.rank(self.qc_high))
        self.qc_high = b.qc
        self.cast_vote(b)

    def on_updateview(self, m: UpdateView) -> None:
        v = m.view
        if v <= self.view or self.beyond_horizon(v):
            return
        senders = set()
        for nv in m.evidence:
            if nv.view != v or nv.claim.replica != nv.sender or nv.claim.v != v:
                return
            if not self.auth.verify_newview_share(nv.claim, nv.share):
                return
            senders.add(nv.sender)
        if len(senders) < self.f + 1:
            return
        self.send_newview(v)
        self.enter_view(v, "updateview")

    # Leader side

    def on_vote(self, m: Vote) -> None:
        label = m.view
        if self.leader(label) != self.id or self.beyond_horizon(label) or label in self.formed:
            return
        if m.block not in self.store:
            return
        bucket = self.votes[(label, m.block)]
        bucket.setdefault(m.sender, m.share)
        if len(bucket) < self.q:
            return
        qc = self.auth.form_qc(m.block, label, bucket)
        if qc is None:
            return
        self.adopt_formed(qc)
        if self.view < label:
            self.enter_view(label, "qc")
        else:
            self.try_propose(label)

    def adopt_formed(self, qc: QC) -> None:
        self.formed[qc.view] = qc
        self.trace("qc", qc.view, qc.block)
        self.ctx.on_qc(self.id, qc)
        self.observe_qc(qc)
        self.update_lock(qc)

    def valid_newview(self, m: NewView) -> bool:
        claim = m.claim
        if claim.replica != m.sender or claim.v != m.view:
            return False
        if not self.auth.verify_qc(m.qc):
            return False
        try:
            expected = nocommit.diff_for(m.view, self.rank(m.qc), self.auth.v_d)
        except nocommit.NonMonotoneView:
            return False
        if claim.c != expected or not self.auth.verify_newview_share(claim, m.share):
            return False
        if m.vote is not None:
            vt = m.vote
            if vt.sender != m.sender or vt.view != m.view or vt.block not in self.store:
                return False
            if not self.auth.verify_vote(vt.sender, vt.block, vt.view, vt.share):
                return False
        return True

    def on_newview(self, m: NewView) -> None:
        v = m.view
        if self.leader(v) != self.id or v < self.view or m.sender in self.newviews[v]:
            return
        if self.beyond_horizon(v) or not self.valid_newview(m):
            return
        nvs = self.newviews[v]
        nvs[m.sender] = m
        if len(nvs) >= self.f + 1 and v not in self.sent_update:
            # Broadcast even when already in v: replicas still behind need the evidence.
            self.sent_update.add(v)
            evidence = tuple(nvs[r] for r in sorted(nvs)[: self.f + 1])
            self.broadcast(UpdateView(self.id, v, evidence))
            if v > self.view:
                self.send_newview(v)
                self.enter_view(v, "newview")
        self.try_propose(v)

    def revote_qc(self, v: int, nvs: dict[int, NewView]) -> QC | None:
        by_block: dict[bytes, dict[int, object]] = defaultdict(dict)
        for r in sorted(nvs):
            vt = nvs[r].vote
            if vt is not None:
                by_block[vt.block][r] = vt.share
        for block_id, shares in sorted(by_block.items(), key=lambda kv: (-len(kv[1]), kv[0])):
            if len(shares) >= self.q:
                return self.auth.form_qc(block_id, v, shares)
        return None

    def try_propose(self, v: int) -> None:
        if self.leader(v) != self.id or v in self.proposed or v != self.view:
            return
        if v in self.formed:
            self.propose(v, self.formed[v], None)
            return
        if v == 1:
            self.propose(1, GENESIS_QC, None)
            return
        nvs = self.newviews.get(v, {})
        if len(nvs) < self.q:
            return
        if self.mode == RELAXED:
            fresh = self.revote_qc(v, nvs)
            if fresh is not None:
                self.adopt_formed(fresh)
                self.propose(v, fresh, None)
                return
        basis = tuple(nvs[r] for r in sorted(nvs))
        best = min(basis, key=lambda nv: (-self.rank(nv.qc), nv.sender))
        qc = best.qc
        if self.mode == RELAXED:
            proof = self.auth.gen_proof(v, [(nv.claim, nv.share) for nv in basis])
            if self.auth.promotion_admits(proof, qc.eff):
                qc = qc.promoted(proof)
        self.propose(v, qc, basis)

    def make_block(self, v: int, qc: QC, variant: int = 0) -> Block:
        parent = self.store[qc.block]
        block = Block(v, qc.block, qc, make_payload(self.id, v, variant), parent.height + 1)
        self.store.add(block)
        return block

    def propose(self, v: int, qc: QC, basis) -> None:
        block = self.make_block(v, qc)
        self.proposed[v] = Proposed(qc, basis, block)
        self.trace("propose", v, block.id, qc_view=qc.view, qc_eff=qc.eff)
        self.broadcast(Proposal(self.id, v, block))

    def on_nack(self, m: Nack) -> None:
        v = m.view
        if not self.unlock or self.leader(v) != self.id:
            return
        prop = self.proposed.get(v)
        if prop is None or prop.basis is None or m.sender in prop.nocommit_sent:
            return
        if self.rank(m.qc) <= self.rank(prop.qc) or not self.auth.verify_qc(m.qc):
            return
        if prop.qc.nc and prop.qc.nc[-1].v == v:
            proof = prop.qc.nc[-1]
        else:
            proof = self.auth.gen_proof(v, [(nv.claim, nv.share) for nv in prop.basis])
        prop.nocommit_sent.add(m.sender)
        self.trace("nocommit", v, prop.block.id, to=m.sender)
        self.emit(m.sender, NoCommit(self.id, v, proof, prop.block))
