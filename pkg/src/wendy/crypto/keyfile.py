"""Binary key containers.

Layout: b"WNDK", version byte, bit width, elements-per-key byte, then for each
key (j ascending, b=0 before b=1, overflow key last) its elements as 2-byte
big-endian length-prefixed blobs. Public files carry (pk, pop); secret files
carry (sk, pk, pop).
"""

from __future__ import annotations

import struct

from . import group
from .bls import BlsKeyPair
from .wendysig import WendyKeyPair, WendyPublicKey

MAGIC = b"WNDK"
VERSION = 1
PUBLIC_FIELDS = 2
SECRET_FIELDS = 3


class KeyFileError(ValueError):
    pass


def _blob(data: bytes) -> bytes:
    return struct.pack(">H", len(data)) + data


def _header(ell: int, fields: int) -> bytes:
    return MAGIC + bytes([VERSION, ell, fields])


def encode_public(pk: WendyPublicKey) -> bytes:
    out = [_header(pk.ell, PUBLIC_FIELDS)]
    for key, pop in pk.all_keys():
        out.append(_blob(group.encode_g2(key)) + _blob(group.encode_g1(pop)))
    return b"".join(out)


def encode_secret(kp: WendyKeyPair) -> bytes:
    out = [_header(kp.ell, SECRET_FIELDS)]
    for k in kp.all_keys():
        out.append(_blob(group.encode_scalar(k.sk)) + _blob(group.encode_g2(k.pk)) + _blob(group.encode_g1(k.pop)))
    return b"".join(out)


def _parse(data: bytes):
    if len(data) < 7 or data[:4] != MAGIC:
        raise KeyFileError("not a WNDK key file")
    version, ell, fields = data[4], data[5], data[6]
    if version != VERSION:
        raise KeyFileError(f"unsupported key file version {version}")
    if fields not in (PUBLIC_FIELDS, SECRET_FIELDS):
        raise KeyFileError(f"bad elements-per-key count {fields}")
    pos = 7
    records = []
    for _ in range(2 * ell + 1):
        rec = []
        for _ in range(fields):
            if pos + 2 > len(data):
                raise KeyFileError("truncated key file")
            (size,) = struct.unpack_from(">H", data, pos)
            pos += 2
            if pos + size > len(data):
                raise KeyFileError("truncated key file")
            rec.append(data[pos : pos + size])
            pos += size
        records.append(rec)
    if pos != len(data):
        raise KeyFileError("trailing bytes after key material")
    return ell, fields, records


def decode_public(data: bytes) -> WendyPublicKey:
    ell, fields, records = _parse(data)
    if fields != PUBLIC_FIELDS:
        raise KeyFileError("expected a public key file")
    keys = [(group.decode_g2(r[0]), group.decode_g1(r[1])) for r in records]
    return WendyPublicKey(
        ell=ell,
        subkeys=tuple((keys[2 * j][0], keys[2 * j + 1][0]) for j in range(ell)),
        pops=tuple((keys[2 * j][1], keys[2 * j + 1][1]) for j in range(ell)),
        overflow=keys[-1][0],
        overflow_pop=keys[-1][1],
    )


def decode_secret(data: bytes) -> WendyKeyPair:
    ell, fields, records = _parse(data)
    if fields != SECRET_FIELDS:
        raise KeyFileError("expected a secret key file")
    keys = []
    for sk_b, pk_b, pop_b in records:
        kp = BlsKeyPair(group.decode_scalar(sk_b), group.decode_g2(pk_b), group.decode_g1(pop_b))
        if group.mul2(group.G2, kp.sk) != kp.pk:
            raise KeyFileError("secret key does not match public key")
        keys.append(kp)
    return WendyKeyPair(
        ell=ell,
        subkeys=tuple((keys[2 * j], keys[2 * j + 1]) for j in range(ell)),
        overflow=keys[-1],
    )
