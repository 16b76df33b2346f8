"""Rounds-to-commit under consecutive-honest-leader rules versus the relaxed rule.

CHLC(k) commits once k honest leaders appear back to back; the relaxed rule
commits at the third honest leader, consecutive or not (omission faults only).
Random election draws each view's leader independently and uniformly, so a
view has an honest leader with probability p = (n - f) / n.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

RANDOM = "random"
ROUND_ROBIN = "round-robin"
ELECTIONS = (RANDOM, ROUND_ROBIN)
RELAXED_LEADERS = 3

CSV_COLUMNS = ("rule", "n", "f", "trials", "seed", "mean", "p50", "p95", "max")


@dataclass(frozen=True)
class CommitRuleModel:
    """``k`` is the number of consecutive honest leaders; None means relaxed."""

    k: int | None = None

    def __post_init__(self):
        if self.k is not None and self.k not in (3, 4):
            raise ValueError(f"CHLC needs k in {{3, 4}}, got {self.k}")

    @property
    def relaxed(self) -> bool:
        return self.k is None

    @property
    def minimum(self) -> int:
        return RELAXED_LEADERS if self.relaxed else self.k

    @property
    def name(self) -> str:
        return "relaxed" if self.relaxed else f"chlc{self.k}"

    @classmethod
    def parse(cls, text: str | CommitRuleModel) -> CommitRuleModel:
        if isinstance(text, CommitRuleModel):
            return text
        t = text.strip().lower().replace("(", "").replace(")", "").replace("-", "")
        if t == "relaxed":
            return cls(None)
        if t in ("chlc3", "chlc4"):
            return cls(int(t[-1]))
        raise ValueError(f"unknown rule {text!r}; use chlc3, chlc4 or relaxed")


CHLC3 = CommitRuleModel(3)
CHLC4 = CommitRuleModel(4)
RELAXED_RULE = CommitRuleModel(None)


def expected_rounds_chlc(p: float, k: int) -> float:
    """Expected views until k consecutive honest leaders: (1 - p^k) / ((1 - p) p^k).

    At p = 1 the value is the limit k.
    """
    if not 0 < p <= 1:
        raise ValueError(f"honest-leader probability must lie in (0, 1], got {p}")
    if k < 1:
        raise ValueError("k must be positive")
    if p == 1:
        return float(k)
    return (1 - p**k) / ((1 - p) * p**k)


def expected_rounds_relaxed(n: int, f: int) -> float:
    """Expected views until the third honest leader: 3n / (n - f)."""
    if n < 1 or f < 0:
        raise ValueError("need n >= 1 and f >= 0")
    if f >= n:
        raise ValueError(f"f={f} leaves no honest replica among n={n}")
    return RELAXED_LEADERS * n / (n - f)


@dataclass
class RoundsDistribution:
    rule: CommitRuleModel
    n: int
    f: int
    election: str
    trials: int
    seed: int
    samples: np.ndarray = field(repr=False)

    @property
    def finite(self) -> np.ndarray:
        return self.samples[np.isfinite(self.samples)]

    @property
    def mean(self) -> float:
        return float(np.mean(self.samples))

    def quantile(self, q: float) -> float:
        return float(np.quantile(self.samples, q, method="inverted_cdf"))

    @property
    def p50(self) -> float:
        return self.quantile(0.5)

    @property
    def p95(self) -> float:
        return self.quantile(0.95)

    @property
    def max(self) -> float:
        return float(np.max(self.samples))

    def row(self) -> dict:
        return {
            "rule": self.rule.name,
            "n": self.n,
            "f": self.f,
            "trials": self.trials,
            "seed": self.seed,
            "mean": _fmt(self.mean),
            "p50": _fmt(self.p50),
            "p95": _fmt(self.p95),
            "max": _fmt(self.max),
        }


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf"
    return str(int(x)) if float(x).is_integer() else f"{x:.6f}"


def _scan(h: np.ndarray, rule: CommitRuleModel, state: np.ndarray, done: np.ndarray, start: int) -> None:
    """Advance every trial over the views in ``h`` (trials x width booleans,
    True for an honest leader), recording in ``done`` the 1-based view at
    which each pending trial first meets the rule."""
    need = rule.minimum
    for j in range(h.shape[1]):
        col = h[:, j]
        if rule.relaxed:
            state += col
        else:
            state[:] = (state + 1) * col
        hit = (done == 0) & (state >= need)
        done[hit] = start + j + 1


def monte_carlo(
    rule,
    n: int,
    f: int,
    election: str = RANDOM,
    trials: int = 100_000,
    seed: int = 0,
) -> RoundsDistribution:
    """Sample rounds-to-commit. Deterministic for a fixed seed.

    Random election draws leaders i.i.d.; round-robin places the f faulty
    replicas uniformly at random per trial and starts the rotation at a
    random position. Round-robin placements with no qualifying run never
    commit and are recorded as infinity.
    """
    rule = CommitRuleModel.parse(rule)
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if election not in ELECTIONS:
        raise ValueError(f"unknown election {election!r}")
    if not 0 <= f < n:
        raise ValueError("need 0 <= f < n")
    rng = np.random.default_rng(seed)
    done = np.zeros(trials, dtype=np.int64)
    state = np.zeros(trials, dtype=np.int64)
    if election == RANDOM:
        p = (n - f) / n
        block = min(4096, max(8 * rule.minimum, int(4 * expected_rounds_chlc(p, rule.minimum))))
        start = 0
        while (done == 0).any():
            _scan(rng.random((trials, block)) < p, rule, state, done, start)
            start += block
        samples = done.astype(float)
    else:
        order = rng.permuted(np.tile(np.arange(n), (trials, 1)), axis=1)
        offset = rng.integers(0, n, size=trials)
        # One full rotation plus the rule minimum covers every possible run.
        horizon = n + rule.minimum
        idx = (offset[:, None] + np.arange(horizon)[None, :]) % n
        _scan(np.take_along_axis(order >= f, idx, axis=1), rule, state, done, 0)
        samples = np.where(done == 0, np.inf, done).astype(float)
    return RoundsDistribution(rule, n, f, election, trials, seed, samples)


def cdf_export(dist: RoundsDistribution | np.ndarray) -> list[tuple[float, float]]:
    """(rounds, fraction of samples <= rounds) at each distinct sample value."""
    samples = dist.samples if isinstance(dist, RoundsDistribution) else np.asarray(dist, dtype=float)
    if samples.size == 0:
        return []
    values, counts = np.unique(samples, return_counts=True)
    frac = np.cumsum(counts) / samples.size
    return [(float(v), float(c)) for v, c in zip(values, frac)]


def stats_csv(dists) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for d in dists:
        w.writerow(d.row())
    return buf.getvalue()


def cdf_csv(points) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("rounds", "fraction"))
    for x, y in points:
        w.writerow((_fmt(x), f"{y:.6f}"))
    return buf.getvalue()
