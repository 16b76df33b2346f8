"""BLS12-381 group suite with instrumented pairings.

Group arithmetic and pairings come from arkworks; hashing to G1 uses the
standard SSWU hash-to-curve (via blspy). Both libraries share the ZCash
compressed point encoding, so points move between them as bytes.
"""

from __future__ import annotations

import contextlib
import hashlib
import threading
from functools import lru_cache

import blspy
from py_arkworks_bls12381 import G1Point, G2Point, GT, Scalar

ORDER = 0x73EDA753299D7D483339D80809A1D80553BDA402FFFE5BFEFFFFFFFF00000001

MSG_DST = b"WENDY-SIG-V1-MSG"
POP_DST = b"WENDY-SIG-V1-POP"

G1_BYTES = 48
G2_BYTES = 96
SCALAR_BYTES = 32

G1 = G1Point()
G2 = G2Point()


class DecodeError(ValueError):
    """Raised when bytes do not decode to a valid non-identity group element."""


class _Counter(threading.local):
    def __init__(self):
        self.count = 0


_pairings = _Counter()


def pairing_counter() -> int:
    """Pairings evaluated on this thread since the last reset."""
    return _pairings.count


def reset_pairing_counter() -> None:
    _pairings.count = 0


@contextlib.contextmanager
def counting_pairings():
    """Scope a pairing count: ``with counting_pairings() as c: ...; c()``."""
    start = _pairings.count
    yield lambda: _pairings.count - start


def pairing(p: G1Point, q: G2Point):
    _pairings.count += 1
    return GT.pairing(p, q)


def pairings_equal(lhs: tuple[G1Point, G2Point], rhs: tuple[G1Point, G2Point]) -> bool:
    """Check e(lhs) == e(rhs); costs exactly two pairings."""
    return pairing(*lhs) == pairing(*rhs)


def scalar(x: int) -> Scalar:
    return Scalar(x % ORDER)


def mul1(p: G1Point, k: int) -> G1Point:
    return p * scalar(k)


def mul2(q: G2Point, k: int) -> G2Point:
    return q * scalar(k)


def g1_sum(points) -> G1Point:
    acc = G1Point.identity()
    for p in points:
        acc = acc + p
    return acc


def g2_sum(points) -> G2Point:
    acc = G2Point.identity()
    for q in points:
        acc = acc + q
    return acc


def is_identity1(p: G1Point) -> bool:
    return p == G1Point.identity()


def is_identity2(q: G2Point) -> bool:
    return q == G2Point.identity()


def encode_g1(p: G1Point) -> bytes:
    return bytes(p.to_compressed_bytes())


def encode_g2(q: G2Point) -> bytes:
    return bytes(q.to_compressed_bytes())


def decode_g1(data: bytes) -> G1Point:
    if len(data) != G1_BYTES:
        raise DecodeError(f"G1 element must be {G1_BYTES} bytes, got {len(data)}")
    try:
        p = G1Point.from_compressed_bytes(list(data))
    except ValueError as exc:
        raise DecodeError(f"malformed G1 element: {exc}") from None
    if is_identity1(p):
        raise DecodeError("identity G1 element rejected")
    return p


def decode_g2(data: bytes) -> G2Point:
    if len(data) != G2_BYTES:
        raise DecodeError(f"G2 element must be {G2_BYTES} bytes, got {len(data)}")
    try:
        q = G2Point.from_compressed_bytes(list(data))
    except ValueError as exc:
        raise DecodeError(f"malformed G2 element: {exc}") from None
    if is_identity2(q):
        raise DecodeError("identity G2 element rejected")
    return q


def encode_scalar(k: int) -> bytes:
    return (k % ORDER).to_bytes(SCALAR_BYTES, "big")


def decode_scalar(data: bytes) -> int:
    if len(data) != SCALAR_BYTES:
        raise DecodeError(f"scalar must be {SCALAR_BYTES} bytes")
    k = int.from_bytes(data, "big")
    if not 0 < k < ORDER:
        raise DecodeError("scalar out of range")
    return k


@lru_cache(maxsize=4096)
def _hash_to_g1_bytes(msg: bytes, dst: bytes) -> bytes:
    return bytes(blspy.G1Element.from_message(msg, dst))


def hash_to_g1(msg: bytes, dst: bytes) -> G1Point:
    return G1Point.from_compressed_bytes(list(_hash_to_g1_bytes(msg, dst)))


def h0(msg: bytes) -> G1Point:
    """Message-domain hash oracle."""
    return hash_to_g1(msg, MSG_DST)


def h1(pk: G2Point) -> G1Point:
    """Public-key-domain hash oracle, used for proofs of possession."""
    return hash_to_g1(encode_g2(pk), POP_DST)


def encode_view(v: int) -> bytes:
    if not 0 <= v < 1 << 64:
        raise ValueError(f"view {v} does not fit in 64 bits")
    return v.to_bytes(8, "big")


def derive_scalar(seed, *labels) -> int:
    """Deterministically derive a nonzero scalar from a seed and labels."""
    if isinstance(seed, int):
        seed = seed.to_bytes(max(1, (seed.bit_length() + 7) // 8), "big")
    elif isinstance(seed, str):
        seed = seed.encode()
    base = hashlib.sha512(b"WENDY-KEYGEN-V1" + bytes(seed))
    for label in labels:
        base.update(b"|" + str(label).encode())
    counter = 0
    while True:
        h = base.copy()
        h.update(counter.to_bytes(4, "big"))
        k = int.from_bytes(h.digest(), "big") % ORDER
        if k:
            return k
        counter += 1
