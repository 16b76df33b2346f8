"""Aggregate signatures over (difference | view) messages.

Each signer holds two subkeys per bit of the difference plus one overflow
key. A share signs only H0(v); the difference is carried by which subkeys
were used, so any number of shares on the same view aggregate into one
signature that verifies with two pairings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from py_arkworks_bls12381 import G1Point, G2Point

from . import group
from .bls import (
    AggregateSignature,
    BlsKeyPair,
    SignatureShare,
    aggregate,
    bls_keygen,
    verify_pop,
)
from .group import G2

MAX_ELL = 64


def default_ell(n: int) -> int:
    return max(1, math.ceil(math.log2(4 * n)))


def max_diff(ell: int) -> int:
    """Largest encodable view difference for a bit width."""
    return (1 << ell) - 1


@dataclass(frozen=True)
class DiffMessage:
    """A view difference ``c`` (None when out of range) signed at view ``v``."""

    c: int | None
    v: int

    @property
    def overflow(self) -> bool:
        return self.c is None

    def to_bytes(self) -> bytes:
        if self.c is None:
            return b"\x01" + bytes(8) + group.encode_view(self.v)
        return b"\x00" + self.c.to_bytes(8, "big") + group.encode_view(self.v)

    @classmethod
    def from_bytes(cls, data: bytes) -> DiffMessage:
        if len(data) != 17 or data[0] not in (0, 1):
            raise group.DecodeError("malformed difference message")
        v = int.from_bytes(data[9:], "big")
        if data[0] == 1:
            return cls(None, v)
        return cls(int.from_bytes(data[1:9], "big"), v)


def _check_ell(ell: int) -> None:
    if not 1 <= ell <= MAX_ELL:
        raise ValueError(f"bit width must be in [1, {MAX_ELL}], got {ell}")


def _bits(c: int, ell: int):
    return [(c >> j) & 1 for j in range(ell)]


@dataclass(frozen=True, eq=False)
class WendyPublicKey:
    ell: int
    subkeys: tuple[tuple[G2Point, G2Point], ...]
    pops: tuple[tuple[G1Point, G1Point], ...]
    overflow: G2Point
    overflow_pop: G1Point

    def __eq__(self, other):
        if not isinstance(other, WendyPublicKey):
            return NotImplemented
        return self.to_bytes() == other.to_bytes()

    def __hash__(self):
        return hash(self.to_bytes())

    def all_keys(self):
        for j in range(self.ell):
            for b in (0, 1):
                yield self.subkeys[j][b], self.pops[j][b]
        yield self.overflow, self.overflow_pop

    def verify_pops(self) -> bool:
        return all(verify_pop(pk, pop) for pk, pop in self.all_keys())

    def selected_key(self, c: int | None) -> G2Point:
        """Product of the subkeys picked by the bits of ``c``."""
        if c is None:
            return self.overflow
        if not 0 <= c < 1 << self.ell:
            raise ValueError(f"difference {c} does not fit in {self.ell} bits")
        return group.g2_sum(self.subkeys[j][bit] for j, bit in enumerate(_bits(c, self.ell)))

    def to_bytes(self) -> bytes:
        from .keyfile import encode_public

        return encode_public(self)


@dataclass(frozen=True, eq=False)
class WendyKeyPair:
    ell: int
    subkeys: tuple[tuple[BlsKeyPair, BlsKeyPair], ...]
    overflow: BlsKeyPair

    def __eq__(self, other):
        if not isinstance(other, WendyKeyPair):
            return NotImplemented
        return self.ell == other.ell and self.subkeys == other.subkeys and self.overflow == other.overflow

    def all_keys(self):
        for pair in self.subkeys:
            yield from pair
        yield self.overflow

    def public(self) -> WendyPublicKey:
        return WendyPublicKey(
            ell=self.ell,
            subkeys=tuple((k0.pk, k1.pk) for k0, k1 in self.subkeys),
            pops=tuple((k0.pop, k1.pop) for k0, k1 in self.subkeys),
            overflow=self.overflow.pk,
            overflow_pop=self.overflow.pop,
        )

    def selected_secret(self, c: int | None) -> int:
        if c is None:
            return self.overflow.sk
        if not 0 <= c < 1 << self.ell:
            raise ValueError(f"difference {c} does not fit in {self.ell} bits")
        return sum(self.subkeys[j][bit].sk for j, bit in enumerate(_bits(c, self.ell))) % group.ORDER


def wendy_keygen(seed, ell: int) -> WendyKeyPair:
    _check_ell(ell)
    subkeys = tuple(
        (bls_keygen(seed, "wendy", ell, j, 0), bls_keygen(seed, "wendy", ell, j, 1)) for j in range(ell)
    )
    return WendyKeyPair(ell=ell, subkeys=subkeys, overflow=bls_keygen(seed, "wendy", ell, "overflow"))


def _as_public(pk) -> WendyPublicKey:
    return pk.public() if isinstance(pk, WendyKeyPair) else pk


def wendy_sign_share(kp: WendyKeyPair, m: DiffMessage, signer: int = 0) -> SignatureShare:
    sk = kp.selected_secret(m.c)
    return SignatureShare(group.mul1(group.h0(group.encode_view(m.v)), sk), signer)


def wendy_verify_share(pk, m: DiffMessage, share) -> bool:
    pk = _as_public(pk)
    sigma = share.sigma if isinstance(share, SignatureShare) else share
    if group.is_identity1(sigma):
        return False
    try:
        key = pk.selected_key(m.c)
    except ValueError:
        return False
    return group.pairings_equal((sigma, G2), (group.h0(group.encode_view(m.v)), key))


def wendy_agg(shares) -> AggregateSignature:
    return aggregate(shares)


def wendy_verify_agg(claims, v: int, agg) -> bool:
    """Verify an aggregate over ``claims`` of (public key, difference).

    A difference may be given as an int, None (overflow) or a DiffMessage;
    a DiffMessage for any view other than ``v`` makes the check fail.
    """
    claims = list(claims)
    if not claims:
        return False
    keys = []
    for pk, c in claims:
        if isinstance(c, DiffMessage):
            if c.v != v:
                return False
            c = c.c
        try:
            keys.append(_as_public(pk).selected_key(c))
        except ValueError:
            return False
    sigma = agg.sigma if isinstance(agg, AggregateSignature) else agg
    if group.is_identity1(sigma):
        return False
    return group.pairings_equal((sigma, G2), (group.h0(group.encode_view(v)), group.g2_sum(keys)))


class DoubleSignError(RuntimeError):
    pass


class WendySigner:
    """Signing oracle that refuses two different differences for one view."""

    def __init__(self, kp: WendyKeyPair, signer: int = 0):
        self.kp = kp
        self.signer = signer
        self._signed: dict[int, int | None] = {}

    def sign(self, m: DiffMessage) -> SignatureShare:
        if m.v in self._signed and self._signed[m.v] != m.c:
            raise DoubleSignError(
                f"replica {self.signer} already signed difference {self._signed[m.v]} for view {m.v}"
            )
        self._signed[m.v] = m.c
        return wendy_sign_share(self.kp, m, self.signer)
