"""Simulator, adversary scripts, scripted scenarios and scenario files."""

import json
from collections import Counter
from dataclasses import replace

import pytest

from wendy.protocol import RELAXED, STRICT, Vote
from wendy.protocol import replica as replica_module
from wendy.simnet import (
    AdversaryScript,
    Byzantine,
    ConfigError,
    CrashAt,
    LinkDelay,
    NetworkConfig,
    Partition,
    SafetyViolation,
    Simulation,
    inject_partition,
    load_scenario,
    parse_scenario,
    random_scenario,
    run,
    scenario_crash_rotation,
    scenario_hidden_lock,
    sweep,
)
from wendy.simnet import catalog
from wendy.simnet.scenario_file import bundled_scenarios


def naive_commit_target(qc2, store, mode, chain=2):
    """Two certificates in any views commit: the rule the audit must catch."""
    x = store.get(qc2.block)
    if x is None or x.height == 0 or x.qc.view == 0:
        return None
    return x.qc.block


class TestNetworkConfig:
    def test_n_must_be_3f_plus_1(self):
        with pytest.raises(ConfigError, match="3f"):
            NetworkConfig(n=5, f=1).validate()

    def test_delays_must_fit_delta(self):
        with pytest.raises(ConfigError):
            NetworkConfig(base_delay=5, jitter=6).validate()

    def test_partition_past_gst_rejected(self):
        cfg = NetworkConfig(gst=100)
        with pytest.raises(ConfigError, match="past GST"):
            inject_partition(cfg, [((3,), 50, 111)])
        assert inject_partition(cfg, [((3,), 50, 110)]).partitions == (Partition((3,), 50, 110),)

    def test_empty_schedule_is_identity(self):
        cfg = NetworkConfig(gst=100)
        assert inject_partition(cfg, []) is cfg

    def test_partition_names_known_replicas(self):
        with pytest.raises(ConfigError):
            inject_partition(NetworkConfig(gst=100), [((4,), 0, 10)])

    def test_script_limits(self):
        with pytest.raises(ConfigError, match="exceed"):
            run(NetworkConfig(), AdversaryScript({0: CrashAt(0), 1: CrashAt(0)}))
        with pytest.raises(ConfigError, match="link delay"):
            run(NetworkConfig(), AdversaryScript({}, (LinkDelay("vote", ticks=11),)))


class TestScheduling:
    def test_fifo_per_link(self):
        cfg = NetworkConfig(gst=1000, pre_gst_max_delay=200, jitter=9, seed=5)
        sim = Simulation(cfg)
        for i in range(60):
            sim.now = i
            sim.send(0, 1, Vote(0, i, b"", None))
        deliveries = sorted(e for e in sim.heap if e[2] == 0 and e[3][0] == 1)
        assert [e[3][1].view for e in deliveries] == list(range(60))

    def test_partition_holds_crossing_messages(self):
        cfg = inject_partition(NetworkConfig(gst=200, max_views=6), [((3,), 0, 200)])
        result = run(cfg)
        entries = [t for t in result.trace if t.replica == 3 and t.event == "enter" and t.view > 1]
        assert all(t.time >= 200 or t.extra["cause"] == "timeout" for t in entries)
        assert result.audit.ok

    def test_post_gst_deliveries_within_delta(self):
        # The simulator asserts the bound on every honest delivery after GST.
        for seed in range(10):
            config, script = random_scenario(seed, 4)
            run(config, script, abort_on_violation=False)

    def test_determinism(self):
        config, script = random_scenario(17, 4)
        a = run(config, script, RELAXED, unlock=True, abort_on_violation=False)
        b = run(config, script, RELAXED, unlock=True, abort_on_violation=False)
        assert a.trace_text() == b.trace_text()
        assert random_scenario(17, 4) == random_scenario(17, 4)

    def test_message_counts(self):
        result = run(NetworkConfig(max_views=4))
        assert result.message_counts["proposal"] == 4 * 4
        assert result.message_counts["vote"] > 0


class TestCrashRotation:
    def test_strict_two_chain(self):
        assert scenario_crash_rotation(3).first_commit_view_of(1) == 6

    def test_relaxed_commits_earlier(self):
        strict = scenario_crash_rotation(3).first_commit_view_of(1)
        relaxed = scenario_crash_rotation(3, mode=RELAXED).first_commit_view_of(1)
        assert relaxed == 4 < strict

    def test_three_chain_never_commits(self):
        result = scenario_crash_rotation(4)
        assert result.committed_heights == 0 and result.audit.ok

    def test_failure_free_control(self):
        assert scenario_crash_rotation(3, crash_set=()).first_commit_view_of(1) == 3
        assert scenario_crash_rotation(4, crash_set=()).first_commit_view_of(1) == 4

    def test_k_must_be_3_or_4(self):
        with pytest.raises(ConfigError):
            scenario_crash_rotation(5)


class TestHiddenLock:
    def test_no_unlock_livelocks(self):
        result = scenario_hidden_lock(catalog.NO_UNLOCK)
        assert result.committed_heights == 0
        assert result.audit.ok
        views = {t.view for t in result.trace if t.event == "enter"}
        assert max(views) == catalog.HIDDEN_LOCK_VIEWS

    def test_wendy_commits_within_three_views(self):
        result = scenario_hidden_lock(catalog.WENDY)
        end = catalog.interference_end_view(result, catalog.hidden_lock_config())
        assert min(result.commit_views.values()) <= end + 3
        assert result.audit.ok
        events = Counter(t.event for t in result.trace)
        assert events["nack"] and events["nocommit"] and events["unlock"]

    def test_victim_holds_hidden_lock(self):
        result = scenario_hidden_lock(catalog.NO_UNLOCK)
        refusals = [t for t in result.trace if t.event == "refuse"]
        # The first refusal is the victim guarding its hidden lock; later views
        # spread stale locks to other replicas as the leaders keep rotating.
        first = refusals[0]
        assert first.replica == catalog.HIDDEN_LOCK_VICTIM and first.extra["lock"] == 3

    def test_control_without_faulty_replica(self):
        result = scenario_hidden_lock(catalog.NO_UNLOCK, faulty=False)
        assert result.committed_heights > 0 and result.audit.ok

    def test_relaxed_mode_also_recovers(self):
        result = scenario_hidden_lock(catalog.WENDY, chain_mode=RELAXED)
        assert result.committed_heights > 0 and result.audit.ok

    def test_unknown_mode(self):
        with pytest.raises(ConfigError):
            scenario_hidden_lock("three-phase")


class TestSafetyAudit:
    def test_naive_rule_caught(self, monkeypatch):
        monkeypatch.setattr(replica_module, "commit_target", naive_commit_target)
        result = run(catalog.counterexample_config(), abort_on_violation=False)
        assert any(v.kind == "conflicting-commit" for v in result.audit.violations)

    def test_naive_rule_aborts_run(self, monkeypatch):
        monkeypatch.setattr(replica_module, "commit_target", naive_commit_target)
        with pytest.raises(SafetyViolation) as err:
            run(catalog.counterexample_config())
        assert err.value.violation.height is not None

    @pytest.mark.parametrize("mode", [STRICT, RELAXED])
    def test_real_rules_survive_counterexample(self, mode):
        result = run(catalog.counterexample_config(), mode=mode, unlock=True)
        assert result.audit.ok

    def test_small_sweep(self):
        results = list(sweep(range(40), n=4))
        assert len(results) == 80
        assert all(r.audit.ok for _, _, r in results)

    def test_sweep_uses_byzantine_roles(self):
        roles = [random_scenario(s, 7)[1].roles for s in range(30)]
        assert any(isinstance(role, Byzantine) for r in roles for role in r.values())
        assert all(len(r) <= 2 for r in roles)


class TestLivenessWindows:
    @pytest.mark.parametrize("n", [4, 7])
    def test_commit_within_bound(self, n):
        checked = 0
        for seed in range(15):
            config, script, mode = catalog.random_crash_scenario(seed, n)
            result = run(config, script, mode, unlock=True)
            for w in catalog.liveness_windows(result, config, script.faulty()):
                checked += 1
                assert w.latency is not None and w.latency <= 7 * config.delta, (seed, w)
        assert checked > 20

    def test_pacemaker_contract(self):
        for seed in range(15):
            config, script, mode = catalog.random_crash_scenario(seed, 7)
            result = run(config, script, mode, unlock=True)
            spread = catalog.sync_spread(result, config, script.faulty())
            assert all(s <= 2 * config.delta for s in spread.values()), (seed, spread)


class TestScenarioFiles:
    def test_bundled_names(self):
        assert {"crash_rotation", "hidden_lock"} <= set(bundled_scenarios())

    def test_hidden_lock_file_matches_catalog(self):
        sc = load_scenario("hidden_lock")
        assert sc.config == catalog.hidden_lock_config()
        by_label = {v.label: v for v in sc.variants}
        assert by_label["wendy"].script == catalog.hidden_lock_script()
        assert by_label["wendy"].unlock and not by_label["no-unlock"].unlock

    @pytest.mark.parametrize("name", ["hidden_lock", "crash_rotation"])
    def test_bundled_expectations_hold(self, name):
        sc = load_scenario(name)
        for variant in sc.variants:
            result = sc.run_variant(variant)
            assert variant.expect.check(result, sc.config) == [], variant.label

    def test_load_from_path(self, tmp_path):
        data = {
            "name": "tiny",
            "network": {"n": 4, "f": 1, "max_views": 5},
            "variants": [{"label": "x", "expect": {"heights": {"min": 3}}}],
        }
        path = tmp_path / "tiny.json"
        path.write_text(json.dumps(data))
        sc = load_scenario(path)
        assert sc.run_variant(sc.variants[0]).committed_heights == 3

    @pytest.mark.parametrize(
        "patch",
        [
            {"bogus": 1},
            {"network": {"n": 4, "f": 1, "colour": "red"}},
            {"roles": {"1": {"role": "byzantine", "actions": [{"action": "fly"}]}}},
            {"roles": {"x": {"role": "honest"}}},
            {"variants": [{"label": "a", "protocol": {"k": 5}}]},
            {"variants": [{"label": "a"}, {"label": "a"}]},
            {"network": {"n": 5, "f": 1}},
            {"roles": {"0": {"role": "crash", "view": 0}, "1": {"role": "crash", "view": 0}}},
        ],
    )
    def test_invalid_scenarios_rejected(self, patch):
        data = {"name": "bad", "network": {"n": 4, "f": 1}}
        data.update(patch)
        with pytest.raises(ConfigError):
            parse_scenario(data)

    def test_missing_scenario(self):
        with pytest.raises(ConfigError, match="no such scenario"):
            load_scenario("does-not-exist")

    def test_overrides(self):
        sc = load_scenario("crash_rotation").with_overrides(seed=9, mode=RELAXED)
        assert sc.config.seed == 9
        assert {v.mode for v in sc.variants} == {RELAXED}
        assert replace(sc.config, seed=0) == load_scenario("crash_rotation").config
