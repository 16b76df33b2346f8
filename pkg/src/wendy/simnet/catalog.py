"""Scripted scenarios and the random adversary generator used by the safety sweep.

Replica ids are 0-based and the leader of view v is ``v mod n``, so with
n=4 the replica called R1 in prose is replica 1 and R4 is replica 0.
"""

from __future__ import annotations

import bisect
import random
from dataclasses import dataclass

from ..protocol.replica import RELAXED, STRICT
from .adversary import (
    AdversaryScript,
    Byzantine,
    CrashAt,
    Delay,
    DoubleVote,
    Equivocate,
    LinkDelay,
    StaleNewView,
    Withhold,
)
from .config import ConfigError, NetworkConfig, Partition
from .sim import SimResult, run

NO_UNLOCK = "no-unlock"
WENDY = "wendy"
HIDDEN_LOCK_MODES = (NO_UNLOCK, WENDY)

# Replica 1 is faulty; replica 3 collects the view-3 certificate that
# nobody else learns about. The partition isolates replica 3 from the moment
# it forms that certificate until GST.
HIDDEN_LOCK_FAULTY = 1
HIDDEN_LOCK_VICTIM = 3
HIDDEN_LOCK_GST = 250
HIDDEN_LOCK_PARTITION = Partition((HIDDEN_LOCK_VICTIM,), 83, HIDDEN_LOCK_GST)
HIDDEN_LOCK_VIEWS = 20


def hidden_lock_config(max_views: int = HIDDEN_LOCK_VIEWS) -> NetworkConfig:
    return NetworkConfig(n=4, f=1, max_views=max_views, gst=HIDDEN_LOCK_GST, partitions=(HIDDEN_LOCK_PARTITION,))


def hidden_lock_script(faulty: bool = True) -> AdversaryScript:
    """The faulty replica never proposes, reports no lock in NewView, and
    holds each vote back until the next proposal appears, so every
    certificate it collects stays private. After GST the scheduler still
    delivers the victim's NewView messages last (within delta), keeping its
    lock out of every leader's first quorum."""
    links = tuple(LinkDelay("newview", src=HIDDEN_LOCK_VICTIM, dst=d, ticks=10) for d in (0, 2))
    if not faulty:
        return AdversaryScript({}, links)
    byz = Byzantine((Delay("vote", until="proposal"), Withhold("proposal"), StaleNewView()))
    return AdversaryScript({HIDDEN_LOCK_FAULTY: byz}, links)


def scenario_hidden_lock(
    mode: str = WENDY,
    *,
    chain_mode: str = STRICT,
    faulty: bool = True,
    max_views: int = HIDDEN_LOCK_VIEWS,
    crypto: str = "symbolic",
) -> SimResult:
    """Hidden-lock livelock: ``mode`` is "no-unlock" (plain two-phase) or "wendy"."""
    if mode not in HIDDEN_LOCK_MODES:
        raise ConfigError(f"unknown hidden-lock mode {mode!r}")
    return run(
        hidden_lock_config(max_views),
        hidden_lock_script(faulty),
        chain_mode,
        unlock=mode == WENDY,
        crypto=crypto,
    )


def view_at(result: SimResult, time: int) -> int:
    """Highest view any honest replica had entered by ``time``."""
    views = [t.view for t in result.trace if t.event == "enter" and t.time <= time and t.replica in result.honest]
    return max(views, default=0)


def interference_end_view(result: SimResult, config: NetworkConfig) -> int:
    """Last view touched by asynchrony: the view in progress when GST arrives
    or the last partition heals, whichever is later."""
    end = max([config.gst] + [p.end for p in config.partitions])
    return view_at(result, end)


def crash_rotation_script(crash_set=(3,)) -> AdversaryScript:
    return AdversaryScript({r: CrashAt(0) for r in crash_set})


def scenario_crash_rotation(
    k: int = 3,
    crash_set=(3,),
    *,
    mode: str = STRICT,
    max_views: int = 16,
    n: int = 4,
    crypto: str = "symbolic",
) -> SimResult:
    """Round-robin leaders with ``crash_set`` silent from the start.

    ``k`` is the number of consecutive honest leaders the strict rule needs
    (3 for the two-phase chain, 4 for a three-chain); relaxed mode ignores it.
    """
    if k not in (3, 4):
        raise ConfigError(f"k must be 3 or 4, got {k}")
    f = (n - 1) // 3
    return run(
        NetworkConfig(n=n, f=f, max_views=max_views),
        crash_rotation_script(tuple(crash_set)),
        mode,
        crypto=crypto,
        chain=k - 1,
    )


# Honest replicas only. Each window hides one freshly formed certificate:
# replica 2's view-2 QC, then replica 0's view-4 QC, then replica 2's view-6
# QC. Under a commit rule that accepts two QCs in any views, replica 2
# commits the view-1 block while the others commit its view-3 sibling.
COUNTEREXAMPLE_PARTITIONS = (
    Partition((2,), 2, 86),
    Partition((0,), 84, 200),
    Partition((2,), 165, 300),
)


def counterexample_config(max_views: int = 10) -> NetworkConfig:
    return NetworkConfig(n=4, f=1, max_views=max_views, gst=300, partitions=COUNTEREXAMPLE_PARTITIONS)


def _some_views(rng: random.Random, horizon: int, p: float):
    picked = frozenset(v for v in range(1, horizon + 2) if rng.random() < p)
    return picked or None


def random_script(rng: random.Random, n: int, f: int, horizon: int) -> AdversaryScript:
    """Up to f faulty replicas, each crashed or running a random mix of actions."""
    faulty = rng.sample(range(n), rng.randint(0, f))
    roles = {}
    for r in faulty:
        if rng.random() < 0.2:
            roles[r] = CrashAt(rng.randint(0, horizon))
            continue
        actions = []
        if rng.random() < 0.6:
            actions.append(DoubleVote(_some_views(rng, horizon, 0.5)))
        for v in range(1, horizon + 1):
            if v % n == r and rng.random() < 0.6:
                others = list(range(n))
                rng.shuffle(others)
                cut = rng.randint(1, n - 1)
                actions.append(Equivocate(v, (tuple(others[:cut]), tuple(others[cut:]))))
        for kind in ("vote", "newview", "proposal", "nack", "nocommit"):
            roll = rng.random()
            if roll < 0.2:
                actions.append(Withhold(kind, _some_views(rng, horizon, 0.5)))
            elif roll < 0.4:
                actions.append(Delay(kind, _some_views(rng, horizon, 0.5), until="proposal"))
        if rng.random() < 0.3:
            actions.append(StaleNewView())
        roles[r] = Byzantine(tuple(actions))
    links = []
    for _ in range(rng.randint(0, 3)):
        links.append(
            LinkDelay(
                rng.choice(("proposal", "vote", "newview")),
                rng.randrange(n),
                rng.randrange(n),
                _some_views(rng, horizon, 0.3),
                rng.randint(1, 10),
            )
        )
    return AdversaryScript(roles, tuple(links))


def random_config(rng: random.Random, n: int, seed: int, horizon: int) -> NetworkConfig:
    f = (n - 1) // 3
    gst = rng.choice((0, 100, 300, 600, 1000))
    parts = []
    for _ in range(rng.randint(0, 4) if gst else 0):
        members = tuple(sorted(rng.sample(range(n), rng.randint(1, n - 1))))
        start = rng.randint(0, gst)
        parts.append(Partition(members, start, rng.randint(start, gst)))
    jitter = rng.randint(0, 9)
    return NetworkConfig(
        n=n,
        f=f,
        gst=gst,
        base_delay=1,
        jitter=jitter,
        pre_gst_max_delay=rng.choice((0, 40, 200)),
        seed=seed,
        max_views=horizon,
        partitions=tuple(parts),
    )


def random_scenario(seed: int, n: int = 4, horizon: int = 12) -> tuple[NetworkConfig, AdversaryScript]:
    """Randomized network and adversary, fully determined by ``seed``."""
    rng = random.Random(f"sweep:{n}:{seed}")
    config = random_config(rng, n, seed, horizon)
    return config, random_script(rng, n, config.f, horizon)


def sweep(seeds, n: int = 4, modes=(STRICT, RELAXED), unlock: bool | None = None, horizon: int = 12):
    """Run the random scenarios; yields (seed, mode, result) and never aborts
    on a violation, so callers can count them. With ``unlock`` unset, even
    seeds run with the unlock path and odd seeds without."""
    for seed in seeds:
        config, script = random_scenario(seed, n, horizon)
        use_unlock = seed % 2 == 0 if unlock is None else unlock
        for mode in modes:
            yield seed, mode, run(config, script, mode, unlock=use_unlock, abort_on_violation=False)


def random_crash_scenario(seed: int, n: int = 4, horizon: int = 16) -> tuple[NetworkConfig, AdversaryScript, str]:
    """Randomized asynchrony before GST with up to f crash faults; returns
    (config, script, mode). Used for the post-GST liveness checks."""
    rng = random.Random(f"live:{n}:{seed}")
    config = random_config(rng, n, seed, horizon)
    crashed = rng.sample(range(n), rng.randint(0, config.f))
    script = AdversaryScript({r: CrashAt(rng.randint(0, 4)) for r in crashed})
    return config, script, rng.choice((STRICT, RELAXED))


@dataclass(frozen=True)
class LivenessWindow:
    """Views ``view`` .. ``view + 2`` all have honest leaders. ``entered`` is
    when the (f+1)-th honest replica entered ``view``; ``committed`` is the
    first honest commit at or after that time (None if there was none)."""

    view: int
    entered: int
    committed: int | None

    @property
    def latency(self) -> int | None:
        return None if self.committed is None else self.committed - self.entered


def _first_entries(result: SimResult, faulty) -> dict[int, dict[int, int]]:
    entries: dict[int, dict[int, int]] = {}
    for t in result.trace:
        if t.event == "enter" and t.replica not in faulty:
            entries.setdefault(t.view, {}).setdefault(t.replica, t.time)
    return entries


def liveness_windows(result: SimResult, config: NetworkConfig, faulty) -> list[LivenessWindow]:
    """Every window of three consecutive honest-leader views lying wholly
    after GST (no honest replica entered the first view before GST).

    The reference time is the (f+1)-th honest entry: a replica that enters
    a view alone on its own timer carries no evidence others act on, while
    f+1 NewViews at an honest leader trigger the UpdateView that pulls
    every honest replica into the view.
    """
    faulty = set(faulty)
    f, n = config.f, config.n
    commits = sorted(t.time for t in result.trace if t.event == "commit" and t.replica not in faulty)
    out = []
    for v, first in sorted(_first_entries(result, faulty).items()):
        times = sorted(first.values())
        if v + 2 > config.max_views or len(times) <= f or times[0] < config.gst:
            continue
        if any((v + i) % n in faulty for i in range(3)):
            continue
        entered = times[f]
        after = bisect.bisect_left(commits, entered)
        out.append(LivenessWindow(v, entered, commits[after] if after < len(commits) else None))
    return out


def sync_spread(result: SimResult, config: NetworkConfig, faulty) -> dict[int, int]:
    """For each post-GST view with an honest leader, ticks from the (f+1)-th
    honest replica reaching the view (or a later one) until the last does."""
    faulty = set(faulty)
    honest = [r for r in range(config.n) if r not in faulty]
    reach: dict[tuple[int, int], int] = {}
    for t in result.trace:
        if t.event == "enter" and t.replica not in faulty:
            for v in range(1, t.view + 1):
                reach.setdefault((v, t.replica), t.time)
    out = {}
    for v in range(1, config.max_views + 1):
        times = sorted(reach[(v, r)] for r in honest if (v, r) in reach)
        if len(times) < len(honest) or times[0] < config.gst or v % config.n in faulty:
            continue
        out[v] = times[-1] - times[config.f]
    return out
