"""Authenticator backends for the replica state machine.

``PairingAuth`` signs and verifies with real BLS12-381 keys. ``SymbolicAuth``
keeps the same interface but represents signatures as tagged tuples that
only the simulator can mint; it exists so large seed sweeps stay fast. The
simulator never lets a replica sign on behalf of another, so the symbolic
backend is sound for the adversaries it runs.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

from .. import nocommit
from ..crypto import bls
from ..crypto.bls import AggregateSignature, SignatureShare
from ..crypto.wendysig import default_ell, max_diff, wendy_keygen, wendy_verify_agg, wendy_verify_share
from .types import GENESIS_ID, QC, vote_message


@dataclass(frozen=True)
class SymbolicAgg:
    sigma: tuple
    signers: tuple[int, ...]

    def to_bytes(self) -> bytes:
        return repr(self.sigma).encode()


class Authenticator:
    """Shared quorum arithmetic; subclasses provide the signature layer."""

    def __init__(self, n: int, f: int, ell: int | None = None):
        if n < 3 * f + 1:
            raise ValueError(f"n={n} cannot tolerate f={f}")
        self.n = n
        self.f = f
        self.q = 2 * f + 1
        self.ell = ell if ell is not None else default_ell(n)
        self.v_d = max_diff(self.ell)
        self.pairings_saved = 0

    # Vote signatures
    def sign_vote(self, replica: int, block_id: bytes, view: int):
        raise NotImplementedError

    def verify_vote(self, replica: int, block_id: bytes, view: int, share) -> bool:
        raise NotImplementedError

    def aggregate_votes(self, block_id: bytes, view: int, shares: Mapping[int, object]):
        raise NotImplementedError

    def verify_qc_sig(self, qc: QC) -> bool:
        raise NotImplementedError

    # View-difference signatures
    def newview_share(self, replica: int, v: int, lock_view: int):
        raise NotImplementedError

    def verify_newview_share(self, claim, share) -> bool:
        raise NotImplementedError

    def gen_proof(self, v: int, pairs):
        raise NotImplementedError

    def verify_proof_sig(self, proof) -> bool:
        raise NotImplementedError

    def form_qc(self, block_id: bytes, view: int, shares: Mapping[int, object]) -> QC | None:
        """Aggregate a quorum of vote shares, dropping invalid ones."""
        if len(shares) < self.q:
            return None
        qc = QC(block_id, view, tuple(sorted(shares)), self.aggregate_votes(block_id, view, shares))
        if self.verify_qc_sig(qc):
            return qc
        good = {r: s for r, s in shares.items() if self.verify_vote(r, block_id, view, s)}
        if len(good) < self.q:
            return None
        qc = QC(block_id, view, tuple(sorted(good)), self.aggregate_votes(block_id, view, good))
        return qc if self.verify_qc_sig(qc) else None

    def verify_qc(self, qc: QC) -> bool:
        """Check the certificate's quorum signature and its no-commit chain."""
        if qc.view == 0:
            if qc.block != GENESIS_ID or qc.signers != ():
                return False
        else:
            if len(set(qc.signers)) != len(qc.signers) or len(qc.signers) < self.q:
                return False
            if any(not 0 <= r < self.n for r in qc.signers):
                return False
            if not self.verify_qc_sig(qc):
                return False
        prev = qc.view
        for proof in qc.nc:
            if proof.v <= prev:
                return False
            if not self.promotion_admits(proof, prev):
                return False
            prev = proof.v
        return True

    def promotion_admits(self, proof, rank: int) -> bool:
        """A proof may lift a certificate of rank ``rank`` to ``proof.v``
        only if no claimant reports a lock above ``rank``."""
        ids = [c.replica for c in proof.claims]
        if len(ids) < self.q or len(set(ids)) != len(ids):
            return False
        if any(c.v != proof.v for c in proof.claims):
            return False
        if nocommit.claims_admit(proof.claims, proof.v, rank + 1, self.v_d) is not None:
            return False
        return self.verify_proof_sig(proof)

    def check_unlock(self, proof, my_lock_view: int, v: int) -> nocommit.Verdict:
        """Lock-downgrade check for a replica holding a lock at ``my_lock_view``."""
        if proof.v != v:
            return nocommit.Verdict(nocommit.Reject.WRONG_VIEW)
        ids = [c.replica for c in proof.claims]
        if len(set(ids)) != len(ids):
            return nocommit.Verdict(nocommit.Reject.DUPLICATE_SIGNER)
        if len(ids) < self.q:
            return nocommit.Verdict(nocommit.Reject.SHORT_QUORUM)
        if any(c.v != proof.v for c in proof.claims):
            return nocommit.Verdict(nocommit.Reject.BAD_SIGNATURE)
        reason = nocommit.claims_admit(proof.claims, proof.v, my_lock_view, self.v_d)
        if reason is not None:
            return nocommit.Verdict(reason)
        if not self.verify_proof_sig(proof):
            return nocommit.Verdict(nocommit.Reject.BAD_SIGNATURE)
        return nocommit.ACCEPT


class PairingAuth(Authenticator):
    """Real BLS votes and Wendy view-difference signatures, with result caching."""

    def __init__(self, n: int, f: int, seed: int = 0, ell: int | None = None):
        super().__init__(n, f, ell)
        self.vote_keys = [bls.bls_keygen(seed, "vote", i) for i in range(n)]
        self.wendy_keys = [wendy_keygen(f"{seed}:{i}".encode(), self.ell) for i in range(n)]
        self.wendy_pks = {i: kp.public() for i, kp in enumerate(self.wendy_keys)}
        self._cache: dict = {}

    def _cached(self, key, fn):
        if key in self._cache:
            self.pairings_saved += 2
            return self._cache[key]
        out = self._cache[key] = fn()
        return out

    def sign_vote(self, replica, block_id, view):
        return bls.bls_sign_share(self.vote_keys[replica].sk, vote_message(block_id, view), replica)

    def verify_vote(self, replica, block_id, view, share):
        if not isinstance(share, SignatureShare) or share.signer != replica:
            return False
        return bls.bls_verify_share(self.vote_keys[replica].pk, vote_message(block_id, view), share)

    def aggregate_votes(self, block_id, view, shares):
        return bls.aggregate(SignatureShare(s.sigma, r) for r, s in shares.items())

    def verify_qc_sig(self, qc):
        agg = qc.sigma
        if not isinstance(agg, AggregateSignature) or agg.signers != qc.signers:
            return False
        key = ("qc", qc.block, qc.view, qc.signers, agg.to_bytes())
        return self._cached(
            key,
            lambda: bls.bls_verify_multi(
                [self.vote_keys[r].pk for r in qc.signers], vote_message(qc.block, qc.view), agg
            ),
        )

    def newview_share(self, replica, v, lock_view):
        return nocommit.make_newview_share(self.wendy_keys[replica], replica, v, lock_view, self.v_d)

    def verify_newview_share(self, claim, share):
        if not isinstance(share, SignatureShare) or claim.replica not in self.wendy_pks:
            return False
        key = ("nv", claim, share.to_bytes())
        return self._cached(key, lambda: wendy_verify_share(self.wendy_pks[claim.replica], claim.message, share))

    def gen_proof(self, v, pairs):
        return nocommit.gen_proof(self.q, pairs, v, self.wendy_pks, check_shares=False)

    def verify_proof_sig(self, proof):
        if any(c.replica not in self.wendy_pks for c in proof.claims):
            return False
        if tuple(sorted(c.replica for c in proof.claims)) != proof.agg.signers:
            return False
        key = ("proof", proof.v, proof.claims, proof.agg.to_bytes())
        return self._cached(
            key,
            lambda: wendy_verify_agg([(self.wendy_pks[c.replica], c.c) for c in proof.claims], proof.v, proof.agg),
        )


class SymbolicAuth(Authenticator):
    """Unforgeable-by-construction tags standing in for signatures."""

    def sign_vote(self, replica, block_id, view):
        return ("vote", replica, block_id, view)

    def verify_vote(self, replica, block_id, view, share):
        return share == ("vote", replica, block_id, view)

    def aggregate_votes(self, block_id, view, shares):
        return ("votes", tuple(sorted(shares)), tuple(shares[r] for r in sorted(shares)))

    def verify_qc_sig(self, qc):
        sig = qc.sigma
        if not isinstance(sig, tuple) or len(sig) != 3 or sig[0] != "votes" or sig[1] != qc.signers:
            return False
        return all(s == ("vote", r, qc.block, qc.view) for r, s in zip(sig[1], sig[2]))

    def newview_share(self, replica, v, lock_view):
        claim = nocommit.ViewDiffClaim(replica, nocommit.diff_for(v, lock_view, self.v_d), v)
        return claim, ("diff", replica, claim.c, v)

    def verify_newview_share(self, claim, share):
        return share == ("diff", claim.replica, claim.c, claim.v)

    def gen_proof(self, v, pairs):
        chosen = {}
        for claim, share in pairs:
            if claim.v == v and claim.replica not in chosen:
                chosen[claim.replica] = (claim, share)
        if len(chosen) < self.q:
            raise nocommit.InsufficientQuorum(f"insufficient quorum: {len(chosen)} of {self.q}")
        picked = [chosen[r] for r in sorted(chosen)]
        agg = SymbolicAgg(tuple(s for _, s in picked), tuple(sorted(chosen)))
        return nocommit.NoCommitProof(v, tuple(c for c, _ in picked), agg)

    def verify_proof_sig(self, proof):
        agg = proof.agg
        if not isinstance(agg, SymbolicAgg):
            return False
        if tuple(sorted(c.replica for c in proof.claims)) != agg.signers:
            return False
        expected = tuple(("diff", c.replica, c.c, c.v) for c in sorted(proof.claims, key=lambda c: c.replica))
        return agg.sigma == expected
