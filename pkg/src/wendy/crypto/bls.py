"""BLS multi-signatures with proofs of possession, plus BGLS aggregation."""

from __future__ import annotations

from dataclasses import dataclass

from py_arkworks_bls12381 import G1Point, G2Point

from . import group
from .group import G2


@dataclass(frozen=True, eq=False)
class BlsKeyPair:
    sk: int
    pk: G2Point
    pop: G1Point

    def __eq__(self, other):
        if not isinstance(other, BlsKeyPair):
            return NotImplemented
        return self.sk == other.sk and self.pk == other.pk and self.pop == other.pop


@dataclass(frozen=True, eq=False)
class SignatureShare:
    sigma: G1Point
    signer: int = 0

    def __eq__(self, other):
        if not isinstance(other, SignatureShare):
            return NotImplemented
        return self.signer == other.signer and self.sigma == other.sigma

    def to_bytes(self) -> bytes:
        return group.encode_g1(self.sigma)


@dataclass(frozen=True, eq=False)
class AggregateSignature:
    sigma: G1Point
    signers: tuple[int, ...]

    def __eq__(self, other):
        if not isinstance(other, AggregateSignature):
            return NotImplemented
        return self.signers == other.signers and self.sigma == other.sigma

    def to_bytes(self) -> bytes:
        return group.encode_g1(self.sigma)


class AggregationError(ValueError):
    pass


def keypair_from_secret(sk: int) -> BlsKeyPair:
    pk = group.mul2(G2, sk)
    return BlsKeyPair(sk=sk, pk=pk, pop=group.mul1(group.h1(pk), sk))


def bls_keygen(seed, *labels) -> BlsKeyPair:
    return keypair_from_secret(group.derive_scalar(seed, "bls", *labels))


def verify_pop(pk: G2Point, pop: G1Point) -> bool:
    if group.is_identity2(pk) or group.is_identity1(pop):
        return False
    return group.pairings_equal((pop, G2), (group.h1(pk), pk))


def bls_sign_share(sk: int, msg: bytes, signer: int = 0) -> SignatureShare:
    return SignatureShare(group.mul1(group.h0(msg), sk), signer)


def bls_verify_share(pk: G2Point, msg: bytes, share) -> bool:
    sigma = share.sigma if isinstance(share, SignatureShare) else share
    if group.is_identity1(sigma):
        return False
    return group.pairings_equal((sigma, G2), (group.h0(msg), pk))


def aggregate(shares) -> AggregateSignature:
    """Multiply shares together; the contributor set is kept sorted."""
    shares = list(shares)
    if not shares:
        raise AggregationError("empty aggregation")
    signers = [s.signer for s in shares]
    if len(set(signers)) != len(signers):
        raise AggregationError(f"duplicate signer ids in {sorted(signers)}")
    return AggregateSignature(group.g1_sum(s.sigma for s in shares), tuple(sorted(signers)))


bls_agg = aggregate


def bls_verify_multi(pks, msg: bytes, agg) -> bool:
    """e(sigma, g2) == e(H0(msg), prod pk): two pairings for any signer count."""
    pks = list(pks)
    if not pks:
        raise ValueError("bls_verify_multi needs at least one public key")
    sigma = agg.sigma if isinstance(agg, AggregateSignature) else agg
    if group.is_identity1(sigma):
        return False
    return group.pairings_equal((sigma, G2), (group.h0(msg), group.g2_sum(pks)))


def bgls_verify_agg(pairs, agg) -> bool:
    """e(sigma, g2) == prod_i e(H0(m_i), pk_i): |I| + 1 pairings."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("bgls_verify_agg needs at least one (pk, msg) pair")
    sigma = agg.sigma if isinstance(agg, AggregateSignature) else agg
    if group.is_identity1(sigma):
        return False
    lhs = group.pairing(sigma, G2)
    rhs = None
    for pk, msg in pairs:
        term = group.pairing(group.h0(msg), pk)
        rhs = term if rhs is None else rhs * term
    return lhs == rhs
