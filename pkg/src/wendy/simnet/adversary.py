"""Declarative adversary scripts: crash faults, scripted Byzantine replicas and link delays.

Message classes are the protocol message kinds (proposal, vote, newview,
updateview, nack, nocommit). Actions select messages by the view field they
carry; for votes that is the label, i.e. the view of the certificate the
vote feeds (one more than the view of the block voted on).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..protocol.replica import Proposed, Replica
from ..protocol.types import GENESIS_QC, NewView, Proposal, Vote, kind_of
from .config import ConfigError

KINDS = ("proposal", "vote", "newview", "updateview", "nack", "nocommit")


def _views(views) -> frozenset[int] | None:
    return None if views is None else frozenset(views)


@dataclass(frozen=True)
class Equivocate:
    """As leader of ``view``, send a distinct block variant to each group."""

    view: int
    groups: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class Withhold:
    kind: str
    views: frozenset[int] | None = None
    targets: frozenset[int] | None = None

    def matches(self, dst: int, msg) -> bool:
        return (
            kind_of(msg) == self.kind
            and (self.views is None or msg.view in self.views)
            and (self.targets is None or dst in self.targets)
        )


@dataclass(frozen=True)
class Delay:
    """Hold matching messages for ``ticks``, or until a proposal for the
    message's view is observed when ``until`` is "proposal"."""

    kind: str
    views: frozenset[int] | None = None
    targets: frozenset[int] | None = None
    ticks: int = 0
    until: str | None = None

    def matches(self, dst: int, msg) -> bool:
        return Withhold.matches(self, dst, msg)  # type: ignore[arg-type]


@dataclass(frozen=True)
class DoubleVote:
    """Vote for every proposal seen in these views, ignoring the lock and
    the one-vote rule."""

    views: frozenset[int] | None = None


@dataclass(frozen=True)
class StaleNewView:
    """Report the genesis certificate in every NewView, hiding any lock."""


@dataclass(frozen=True)
class LinkDelay:
    """Network-level scheduling: matching messages take exactly ``ticks``."""

    kind: str
    src: int | None = None
    dst: int | None = None
    views: frozenset[int] | None = None
    ticks: int = 0

    def matches(self, src: int, dst: int, msg) -> bool:
        return (
            kind_of(msg) == self.kind
            and (self.src is None or src == self.src)
            and (self.dst is None or dst == self.dst)
            and (self.views is None or msg.view in self.views)
        )


@dataclass(frozen=True)
class Honest:
    pass


@dataclass(frozen=True)
class CrashAt:
    view: int


@dataclass(frozen=True)
class Byzantine:
    actions: tuple = ()


@dataclass(frozen=True)
class AdversaryScript:
    roles: dict = field(default_factory=dict)
    links: tuple[LinkDelay, ...] = ()

    def role(self, rid: int):
        return self.roles.get(rid, Honest())

    def faulty(self) -> list[int]:
        return sorted(r for r, role in self.roles.items() if not isinstance(role, Honest))

    def validate(self, n: int, f: int, delta: int) -> AdversaryScript:
        bad = self.faulty()
        if len(bad) > f:
            raise ConfigError(f"{len(bad)} faulty replicas exceed f={f}")
        for r in self.roles:
            if not 0 <= r < n:
                raise ConfigError(f"role for unknown replica {r}")
        for link in self.links:
            if link.kind not in KINDS:
                raise ConfigError(f"unknown message class {link.kind!r}")
            if not 0 <= link.ticks <= delta:
                raise ConfigError(f"link delay {link.ticks} outside [0, delta]")
        for role in self.roles.values():
            for act in getattr(role, "actions", ()):
                kind = getattr(act, "kind", None)
                if kind is not None and kind not in KINDS:
                    raise ConfigError(f"unknown message class {kind!r}")
                if isinstance(act, Delay) and act.until not in (None, "proposal"):
                    raise ConfigError(f"unknown delay trigger {act.until!r}")
        return self


HONEST_SCRIPT = AdversaryScript()


class CrashingReplica(Replica):
    """Omission fault: silent from the moment it would enter ``crash_view``."""

    faulty = True

    def __init__(self, *args, crash_view: int, **kwargs):
        super().__init__(*args, **kwargs)
        self.crash_view = crash_view
        self.crashed = False

    def enter_view(self, v, cause):
        if v >= self.crash_view:
            if not self.crashed:
                self.crashed = True
                self.trace("crash", v)
            return
        super().enter_view(v, cause)

    def emit(self, dst, msg):
        if not self.crashed:
            super().emit(dst, msg)

    def deliver(self, msg):
        if not self.crashed:
            super().deliver(msg)

    def on_timer(self, v):
        if not self.crashed:
            super().on_timer(v)


class ByzantineReplica(Replica):
    """Runs the honest code path, filtered through scripted deviations."""

    byzantine = True
    faulty = True

    def __init__(self, *args, actions=(), **kwargs):
        super().__init__(*args, **kwargs)
        self.actions = tuple(actions)
        self.held: list[tuple[int, object, Delay]] = []

    def _acts(self, cls):
        return [a for a in self.actions if isinstance(a, cls)]

    def emit(self, dst, msg):
        for act in self._acts(Withhold):
            if act.matches(dst, msg):
                self.trace("withhold", msg.view, kind=kind_of(msg), to=dst)
                return
        for act in self._acts(Delay):
            if act.matches(dst, msg):
                if act.until == "proposal":
                    self.held.append((dst, msg, act))
                else:
                    self.ctx.send_at(self.id, dst, msg, self.ctx.now + act.ticks)
                return
        super().emit(dst, msg)

    def release(self, view: int) -> None:
        keep = []
        for dst, msg, act in self.held:
            if msg.view <= view:
                self.trace("release", msg.view, kind=kind_of(msg), to=dst)
                Replica.emit(self, dst, msg)
            else:
                keep.append((dst, msg, act))
        self.held = keep

    def deliver(self, msg):
        if isinstance(msg, Proposal):
            self.release(msg.view)
        super().deliver(msg)

    def send_newview(self, v):
        if not self._acts(StaleNewView):
            super().send_newview(v)
            return
        qc = GENESIS_QC
        if v in self.sent_newview or self.beyond_horizon(v) or self.rank(qc) >= v:
            return
        self.sent_newview.add(v)
        claim, share = self.auth.newview_share(self.id, v, self.rank(qc))
        self.trace("newview", v, qc.block, lock=self.rank(qc), stale=True)
        self.emit(self.leader(v), NewView(self.id, v, qc, claim, share, None))

    def consider(self, b):
        for act in self._acts(DoubleVote):
            if act.views is None or b.view in act.views:
                label = b.view + 1
                self.voted[label] = b.id
                self.last_voted = b.id
                self.trace("vote", b.view, b.id, double=True)
                self.emit(self.leader(label), Vote(self.id, label, b.id, self.auth.sign_vote(self.id, b.id, label)))
                return
        super().consider(b)

    def propose(self, v, qc, basis):
        groups = [a.groups for a in self._acts(Equivocate) if a.view == v]
        if not groups:
            super().propose(v, qc, basis)
            return
        first = None
        for variant, group in enumerate(groups[0]):
            block = self.make_block(v, qc, variant)
            first = first or block
            self.trace("propose", v, block.id, variant=variant, to=list(group))
            for dst in group:
                self.emit(dst, Proposal(self.id, v, block))
        self.proposed[v] = Proposed(qc, basis, first)


def build_replica(rid, role, n, f, auth, **kwargs) -> Replica:
    if isinstance(role, Honest):
        return Replica(rid, n, f, auth, **kwargs)
    if isinstance(role, CrashAt):
        return CrashingReplica(rid, n, f, auth, crash_view=role.view, **kwargs)
    if isinstance(role, Byzantine):
        return ByzantineReplica(rid, n, f, auth, actions=role.actions, **kwargs)
    raise ConfigError(f"unknown role {role!r}")
