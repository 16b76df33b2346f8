"""Signature microbenchmarks: wall time and pairing counts per operation."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass

from .crypto import (
    DiffMessage,
    bgls_verify_agg,
    bls_agg,
    bls_keygen,
    bls_sign_share,
    bls_verify_multi,
    counting_pairings,
    default_ell,
    max_diff,
    wendy_agg,
    wendy_keygen,
    wendy_sign_share,
    wendy_verify_agg,
)
from .crypto.group import encode_view

SCHEMES = ("bls-multi", "bgls", "wendy")
OPS = ("sign", "agg", "verify")
CSV_COLUMNS = ("scheme", "size", "op", "reps", "pairings", "ok", "mean_ms", "min_ms")
TIMING_COLUMNS = ("mean_ms", "min_ms")


@dataclass(frozen=True)
class BenchRow:
    scheme: str
    size: int
    op: str
    reps: int
    pairings: int
    ok: bool
    mean_ms: float
    min_ms: float

    def as_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "size": self.size,
            "op": self.op,
            "reps": self.reps,
            "pairings": self.pairings,
            "ok": int(self.ok),
            "mean_ms": f"{self.mean_ms:.3f}",
            "min_ms": f"{self.min_ms:.3f}",
        }


def _timed(fn, reps: int):
    times = []
    result = None
    pairings = 0
    for _ in range(reps):
        with counting_pairings() as count:
            t0 = time.perf_counter()
            result = fn()
            times.append((time.perf_counter() - t0) * 1000)
        pairings = count()
    return result, pairings, sum(times) / len(times), min(times)


def _workload(scheme: str, size: int, ell: int, seed: int):
    """Return (sign_one, shares, aggregate, verify) for one scheme and size."""
    view = 1 << 20
    if scheme == "wendy":
        keys = [wendy_keygen(f"bench:{seed}:{i}".encode(), ell) for i in range(size)]
        top = max_diff(ell)
        diffs = [(i * 7919) % (top + 1) for i in range(size)]
        msgs = [DiffMessage(c, view) for c in diffs]
        shares = [wendy_sign_share(k, m, i) for i, (k, m) in enumerate(zip(keys, msgs))]
        claims = [(k.public(), c) for k, c in zip(keys, diffs)]
        return (
            lambda: wendy_sign_share(keys[0], msgs[0], 0),
            shares,
            wendy_agg,
            lambda agg: wendy_verify_agg(claims, view, agg),
        )
    keys = [bls_keygen(f"bench:{seed}", scheme, i) for i in range(size)]
    if scheme == "bls-multi":
        msg = b"block" + encode_view(view)
        shares = [bls_sign_share(k.sk, msg, i) for i, k in enumerate(keys)]
        pks = [k.pk for k in keys]
        return (lambda: bls_sign_share(keys[0].sk, msg, 0), shares, bls_agg, lambda agg: bls_verify_multi(pks, msg, agg))
    if scheme == "bgls":
        msgs = [b"diff" + encode_view(view) + i.to_bytes(4, "big") for i in range(size)]
        shares = [bls_sign_share(k.sk, m, i) for i, (k, m) in enumerate(zip(keys, msgs))]
        pairs = [(k.pk, m) for k, m in zip(keys, msgs)]
        return (lambda: bls_sign_share(keys[0].sk, msgs[0], 0), shares, bls_agg, lambda agg: bgls_verify_agg(pairs, agg))
    raise ValueError(f"unknown scheme {scheme!r}; choose from {', '.join(SCHEMES)}")


def bench_sig(schemes=SCHEMES, sizes=(4, 16, 64), ell: int | None = None, reps: int = 3, seed: int = 0) -> list[BenchRow]:
    """Benchmark sign, aggregate and verify for each scheme at each signer count.

    ``ell`` defaults to the width a replica set of that size would use.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    rows = []
    for scheme in schemes:
        for size in sizes:
            if size < 1:
                raise ValueError("signer count must be positive")
            width = ell if ell is not None else default_ell(size)
            sign_one, shares, agg_fn, verify = _workload(scheme, size, width, seed)
            _, p, mean, low = _timed(sign_one, reps)
            rows.append(BenchRow(scheme, size, "sign", reps, p, True, mean, low))
            agg, p, mean, low = _timed(lambda: agg_fn(shares), reps)
            rows.append(BenchRow(scheme, size, "agg", reps, p, True, mean, low))
            ok, p, mean, low = _timed(lambda: verify(agg), reps)
            rows.append(BenchRow(scheme, size, "verify", reps, p, bool(ok), mean, low))
    return rows


def expected_verify_pairings(scheme: str, size: int) -> int:
    return size + 1 if scheme == "bgls" else 2


def check_rows(rows, speedup: float = 5.0) -> list[str]:
    """Threshold checks: pairing laws, successful verification, Wendy
    verification faster than BGLS at |I| >= 16 and at least ``speedup``
    times faster at |I| >= 64."""
    misses = []
    verify = {(r.scheme, r.size): r for r in rows if r.op == "verify"}
    for (scheme, size), r in sorted(verify.items()):
        if not r.ok:
            misses.append(f"{scheme} verify rejected an honest aggregate at |I|={size}")
        want = expected_verify_pairings(scheme, size)
        if r.pairings != want:
            misses.append(f"{scheme} verify used {r.pairings} pairings at |I|={size}, expected {want}")
    for (scheme, size), r in sorted(verify.items()):
        other = verify.get(("bgls", size))
        if scheme == "wendy" and size >= 16 and other is not None:
            factor = speedup if size >= 64 else 1.0
            if not r.min_ms * factor < other.min_ms:
                misses.append(
                    f"wendy verify {r.min_ms:.2f} ms x {factor:g} not below bgls {other.min_ms:.2f} ms at |I|={size}"
                )
    return misses


def rows_csv(rows, timing: bool = True) -> str:
    cols = CSV_COLUMNS if timing else tuple(c for c in CSV_COLUMNS if c not in TIMING_COLUMNS)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow(r.as_dict())
    return buf.getvalue()
