"""Signature benchmark harness: pairing counts and threshold checks."""

import csv
import io

import pytest

from wendy.bench import CSV_COLUMNS, BenchRow, bench_sig, check_rows, expected_verify_pairings, rows_csv


@pytest.fixture(scope="module")
def rows():
    return bench_sig(sizes=(2, 5), ell=2, reps=1)


class TestBenchSig:
    def test_every_verify_accepts(self, rows):
        assert all(r.ok for r in rows)
        assert {(r.scheme, r.size, r.op) for r in rows} == {
            (s, n, op) for s in ("bls-multi", "bgls", "wendy") for n in (2, 5) for op in ("sign", "agg", "verify")
        }

    def test_pairing_law(self, rows):
        for r in rows:
            if r.op == "verify":
                assert r.pairings == expected_verify_pairings(r.scheme, r.size)
            else:
                assert r.pairings == 0

    def test_argument_checks(self):
        with pytest.raises(ValueError):
            bench_sig(reps=0)
        with pytest.raises(ValueError):
            bench_sig(schemes=("rsa",), sizes=(2,), reps=1)
        with pytest.raises(ValueError):
            bench_sig(schemes=("bgls",), sizes=(0,), reps=1)

    def test_csv(self, rows):
        table = list(csv.DictReader(io.StringIO(rows_csv(rows))))
        assert tuple(table[0]) == CSV_COLUMNS and len(table) == len(rows)
        assert "mean_ms" not in rows_csv(rows, timing=False)


class TestCheckRows:
    def _verify(self, scheme, size, ms, pairings=None, ok=True):
        p = expected_verify_pairings(scheme, size) if pairings is None else pairings
        return BenchRow(scheme, size, "verify", 1, p, ok, ms, ms)

    def test_passes(self):
        rows = [self._verify("wendy", 64, 8.0), self._verify("bgls", 64, 170.0), self._verify("wendy", 16, 8.0), self._verify("bgls", 16, 40.0)]
        assert check_rows(rows) == []

    def test_speedup_applies_at_64(self):
        rows = [self._verify("wendy", 64, 40.0), self._verify("bgls", 64, 170.0)]
        assert len(check_rows(rows)) == 1
        # At 16 signers only the ordering is checked.
        rows = [self._verify("wendy", 16, 30.0), self._verify("bgls", 16, 40.0)]
        assert check_rows(rows) == []

    def test_pairing_and_rejection_misses(self):
        misses = check_rows([self._verify("wendy", 4, 1.0, pairings=5), self._verify("bgls", 4, 1.0, ok=False)])
        assert len(misses) == 2
