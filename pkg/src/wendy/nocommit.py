"""No-commit proofs built from view-difference aggregate signatures.

At a view change every replica signs the difference between the target
view and the view of its highest quorum certificate. A leader aggregates a
quorum of these shares into one proof; a replica locked on a certificate
accepts the proof only if no claim in it reaches its own lock view, which by
quorum intersection shows the lock was never committed.
"""

from __future__ import annotations

import enum
import itertools
import struct
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

from .crypto import group
from .crypto.bls import AggregateSignature, SignatureShare
from .crypto.wendysig import (
    DiffMessage,
    WendyKeyPair,
    WendyPublicKey,
    max_diff,
    wendy_agg,
    wendy_sign_share,
    wendy_verify_agg,
    wendy_verify_share,
)


class NonMonotoneView(ValueError):
    pass


class InsufficientQuorum(ValueError):
    pass


class InvalidShare(ValueError):
    def __init__(self, replica: int):
        super().__init__(f"invalid view-difference share from replica {replica}")
        self.replica = replica


class Reject(enum.Enum):
    BAD_SIGNATURE = "bad-signature"
    SHORT_QUORUM = "short-quorum"
    DUPLICATE_SIGNER = "duplicate-signer"
    LOCK_VIEW_COLLISION = "lock-view-collision"
    WRONG_VIEW = "wrong-view"
    OUT_OF_RANGE = "out-of-range"


@dataclass(frozen=True)
class ViewDiffClaim:
    replica: int
    c: int | None
    v: int

    @property
    def lock_view(self) -> int | None:
        """View of the claimant's lock, or None for an out-of-range claim."""
        return None if self.c is None else self.v - self.c

    @property
    def message(self) -> DiffMessage:
        return DiffMessage(self.c, self.v)


@dataclass(frozen=True)
class NoCommitProof:
    v: int
    claims: tuple[ViewDiffClaim, ...]
    agg: AggregateSignature

    def max_lock_view(self) -> int | None:
        views = [c.lock_view for c in self.claims if c.c is not None]
        return max(views) if views else None

    def to_bytes(self) -> bytes:
        out = [group.encode_view(self.v), struct.pack(">H", len(self.claims))]
        for claim in self.claims:
            flag, c = (1, 0) if claim.c is None else (0, claim.c)
            out.append(struct.pack(">HBQ", claim.replica, flag, c))
        out.append(self.agg.to_bytes())
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> NoCommitProof:
        if len(data) < 10:
            raise group.DecodeError("truncated no-commit proof")
        v = int.from_bytes(data[:8], "big")
        (count,) = struct.unpack_from(">H", data, 8)
        pos = 10
        claims = []
        for _ in range(count):
            if pos + 11 > len(data):
                raise group.DecodeError("truncated no-commit proof")
            replica, flag, c = struct.unpack_from(">HBQ", data, pos)
            if flag not in (0, 1):
                raise group.DecodeError("bad claim flag")
            claims.append(ViewDiffClaim(replica, None if flag else c, v))
            pos += 11
        sigma = group.decode_g1(data[pos:])
        return cls(v, tuple(claims), AggregateSignature(sigma, tuple(sorted(c.replica for c in claims))))


@dataclass(frozen=True)
class Verdict:
    reason: Reject | None = None

    @property
    def accepted(self) -> bool:
        return self.reason is None

    def __bool__(self):
        return self.accepted


ACCEPT = Verdict()


def diff_for(v: int, qc_view: int, v_d: int) -> int | None:
    """Signed difference for a lock at ``qc_view`` seen from view ``v``."""
    if v <= qc_view:
        raise NonMonotoneView(f"target view {v} must exceed lock view {qc_view}")
    c = v - qc_view
    return c if c <= v_d else None


def make_newview_share(
    kp: WendyKeyPair, replica: int, v: int, qc_view: int, v_d: int | None = None
) -> tuple[ViewDiffClaim, SignatureShare]:
    if v_d is None:
        v_d = max_diff(kp.ell)
    claim = ViewDiffClaim(replica, diff_for(v, qc_view, v_d), v)
    return claim, wendy_sign_share(kp, claim.message, replica)


def gen_proof(
    q: int,
    newviews: Sequence[tuple[ViewDiffClaim, SignatureShare]],
    v: int,
    pubkeys: Mapping[int, WendyPublicKey],
    *,
    check_shares: bool = True,
) -> NoCommitProof:
    """Aggregate at least ``q`` view-difference shares for view ``v``."""
    chosen = {}
    for claim, share in newviews:
        if claim.v != v:
            continue
        if claim.replica in chosen:
            continue
        if check_shares and not wendy_verify_share(pubkeys[claim.replica], claim.message, share):
            raise InvalidShare(claim.replica)
        chosen[claim.replica] = (claim, share)
    if len(chosen) < q:
        raise InsufficientQuorum(f"insufficient quorum: {len(chosen)} of {q} claims for view {v}")
    picked = [chosen[r] for r in sorted(chosen)]
    claims = tuple(c for c, _ in picked)
    return NoCommitProof(v, claims, wendy_agg(s for _, s in picked))


def claims_admit(
    claims: Sequence[ViewDiffClaim], v: int, my_lock_view: int, v_d: int
) -> Reject | None:
    """The lock-view half of proof checking, without signatures.

    Every in-range claim must imply a lock strictly below ``my_lock_view``.
    An out-of-range claim implies a lock below ``v - v_d``, which only
    settles the question when ``my_lock_view`` is at least that high.
    """
    for claim in claims:
        if claim.c is None:
            if my_lock_view < v - v_d:
                return Reject.OUT_OF_RANGE
        elif claim.lock_view >= my_lock_view:
            return Reject.LOCK_VIEW_COLLISION
    return None


def verify_proof(
    proof: NoCommitProof,
    q: int,
    my_lock_view: int,
    pubkeys: Mapping[int, WendyPublicKey],
    *,
    current_view: int | None = None,
    v_d: int | None = None,
) -> Verdict:
    if current_view is not None and proof.v != current_view:
        return Verdict(Reject.WRONG_VIEW)
    ids = [c.replica for c in proof.claims]
    if len(set(ids)) != len(ids):
        return Verdict(Reject.DUPLICATE_SIGNER)
    if len(ids) < q:
        return Verdict(Reject.SHORT_QUORUM)
    if any(c.v != proof.v or c.replica not in pubkeys for c in proof.claims):
        return Verdict(Reject.BAD_SIGNATURE)
    if tuple(sorted(ids)) != proof.agg.signers:
        return Verdict(Reject.BAD_SIGNATURE)
    if v_d is None:
        v_d = max_diff(pubkeys[ids[0]].ell)
    reason = claims_admit(proof.claims, proof.v, my_lock_view, v_d)
    if reason is not None:
        return Verdict(reason)
    claims = [(pubkeys[c.replica], c.c) for c in proof.claims]
    if not wendy_verify_agg(claims, proof.v, proof.agg):
        return Verdict(Reject.BAD_SIGNATURE)
    return ACCEPT


def soundness_property_check(
    locks: Mapping[int, int], v: int, q: int, my_lock_view: int, v_d: int
) -> bool:
    """Check soundness of proof acceptance over every ``q``-subset of claims.

    ``locks`` maps each replica to the view of its highest certificate. If
    some quorum of ``q`` replicas is locked at or above ``my_lock_view``,
    every subset the leader could pick must be rejected; otherwise the check
    passes vacuously.
    """
    at_or_above = [r for r, lock in locks.items() if lock >= my_lock_view]
    if len(at_or_above) < q:
        return True
    for subset in itertools.combinations(sorted(locks), q):
        claims = [ViewDiffClaim(r, diff_for(v, locks[r], v_d), v) for r in subset]
        if claims_admit(claims, v, my_lock_view, v_d) is None:
            return False
    return True
