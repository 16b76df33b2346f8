"""JSON scenario files: schema, loading and expectation checks.

A scenario names the network, the adversary script and one or more protocol
variants to run. Each variant may override the protocol settings, the
replica roles and its expectations. Unknown keys are rejected everywhere.

Example::

    {
      "name": "crash",
      "network": {"n": 4, "f": 1, "max_views": 12},
      "roles": {"3": {"role": "crash", "view": 0}},
      "variants": [
        {"label": "strict", "protocol": {"mode": "strict"},
         "expect": {"commit_of_view": {"view": 1, "exactly": 6}}}
      ]
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import jsonschema

from ..protocol.replica import MODES, STRICT
from .adversary import (
    KINDS,
    AdversaryScript,
    Byzantine,
    CrashAt,
    Delay,
    DoubleVote,
    Equivocate,
    Honest,
    LinkDelay,
    StaleNewView,
    Withhold,
)
from .catalog import interference_end_view
from .config import ConfigError, NetworkConfig, Partition
from .sim import SimResult, run

_VIEWS = {"type": "array", "items": {"type": "integer", "minimum": 0}}
_REPLICA = {"type": "integer", "minimum": 0}


def _obj(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


_ACTION = {
    "oneOf": [
        _obj(
            {
                "action": {"const": "equivocate"},
                "view": {"type": "integer", "minimum": 1},
                "groups": {"type": "array", "items": {"type": "array", "items": _REPLICA}, "minItems": 1},
            },
            ("action", "view", "groups"),
        ),
        _obj(
            {"action": {"const": "withhold"}, "kind": {"enum": list(KINDS)}, "views": _VIEWS, "targets": _VIEWS},
            ("action", "kind"),
        ),
        _obj(
            {
                "action": {"const": "delay"},
                "kind": {"enum": list(KINDS)},
                "views": _VIEWS,
                "targets": _VIEWS,
                "ticks": {"type": "integer", "minimum": 0},
                "until": {"enum": ["proposal"]},
            },
            ("action", "kind"),
        ),
        _obj({"action": {"const": "double_vote"}, "views": _VIEWS}, ("action",)),
        _obj({"action": {"const": "stale_newview"}}, ("action",)),
    ]
}

_ROLE = {
    "oneOf": [
        _obj({"role": {"const": "honest"}}, ("role",)),
        _obj({"role": {"const": "crash"}, "view": {"type": "integer", "minimum": 0}}, ("role", "view")),
        _obj({"role": {"const": "byzantine"}, "actions": {"type": "array", "items": _ACTION}}, ("role", "actions")),
    ]
}

_ROLES = {
    "type": "object",
    "patternProperties": {"^[0-9]+$": _ROLE},
    "additionalProperties": False,
}

_PROTOCOL = _obj(
    {
        "mode": {"enum": list(MODES)},
        "unlock": {"type": "boolean"},
        "k": {"enum": [3, 4]},
        "crypto": {"enum": ["symbolic", "pairing"]},
    }
)

_BOUNDS = _obj({"min": {"type": "integer"}, "max": {"type": "integer"}})

_EXPECT = _obj(
    {
        "heights": _BOUNDS,
        "commit_of_view": _obj(
            {
                "view": {"type": "integer", "minimum": 1},
                "exactly": {"type": ["integer", "null"]},
                "at_most": {"type": "integer"},
            },
            ("view",),
        ),
        "first_commit_within": {"type": "integer", "minimum": 0},
        "audit_ok": {"type": "boolean"},
    }
)

SCHEMA = _obj(
    {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "network": _obj(
            {
                "n": {"type": "integer", "minimum": 1},
                "f": {"type": "integer", "minimum": 0},
                "delta": {"type": "integer", "minimum": 1},
                "timeout": {"type": "integer", "minimum": 1},
                "gst": {"type": "integer", "minimum": 0},
                "base_delay": {"type": "integer", "minimum": 0},
                "jitter": {"type": "integer", "minimum": 0},
                "pre_gst_max_delay": {"type": "integer", "minimum": 0},
                "seed": {"type": "integer", "minimum": 0},
                "max_views": {"type": "integer", "minimum": 1},
                "max_time": {"type": "integer", "minimum": 1},
                "partitions": {
                    "type": "array",
                    "items": _obj(
                        {
                            "members": {"type": "array", "items": _REPLICA, "minItems": 1},
                            "start": {"type": "integer", "minimum": 0},
                            "end": {"type": "integer", "minimum": 0},
                        },
                        ("members", "start", "end"),
                    ),
                },
            }
        ),
        "roles": _ROLES,
        "links": {
            "type": "array",
            "items": _obj(
                {
                    "kind": {"enum": list(KINDS)},
                    "src": _REPLICA,
                    "dst": _REPLICA,
                    "views": _VIEWS,
                    "ticks": {"type": "integer", "minimum": 0},
                },
                ("kind", "ticks"),
            ),
        },
        "protocol": _PROTOCOL,
        "variants": {
            "type": "array",
            "minItems": 1,
            "items": _obj(
                {"label": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"}, "protocol": _PROTOCOL, "roles": _ROLES, "expect": _EXPECT},
                ("label",),
            ),
        },
    },
    ("name", "network"),
)


@dataclass(frozen=True)
class Expectation:
    heights_min: int | None = None
    heights_max: int | None = None
    commit_view: int | None = None
    commit_exactly: int | None = None
    commit_exact_set: bool = False
    commit_at_most: int | None = None
    first_commit_within: int | None = None
    audit_ok: bool | None = None

    def check(self, result: SimResult, config: NetworkConfig) -> list[str]:
        """Return a description of every unmet expectation."""
        misses = []
        h = result.committed_heights
        if self.heights_min is not None and h < self.heights_min:
            misses.append(f"committed heights {h} < {self.heights_min}")
        if self.heights_max is not None and h > self.heights_max:
            misses.append(f"committed heights {h} > {self.heights_max}")
        if self.commit_view is not None:
            got = result.first_commit_view_of(self.commit_view)
            if self.commit_exact_set and got != self.commit_exactly:
                misses.append(f"view-{self.commit_view} block committed at {got}, expected {self.commit_exactly}")
            if self.commit_at_most is not None and (got is None or got > self.commit_at_most):
                misses.append(f"view-{self.commit_view} block committed at {got}, expected <= {self.commit_at_most}")
        if self.first_commit_within is not None:
            end = interference_end_view(result, config)
            first = min(result.commit_views.values(), default=None)
            if first is None or first > end + self.first_commit_within:
                misses.append(f"first commit at view {first}, expected <= {end} + {self.first_commit_within}")
        if self.audit_ok is not None and result.audit.ok != self.audit_ok:
            misses.append(f"audit ok = {result.audit.ok}, expected {self.audit_ok}")
        return misses


@dataclass(frozen=True)
class Variant:
    label: str
    mode: str = STRICT
    unlock: bool = False
    k: int = 3
    crypto: str = "symbolic"
    script: AdversaryScript = field(default_factory=AdversaryScript)
    expect: Expectation = field(default_factory=Expectation)


@dataclass(frozen=True)
class Scenario:
    name: str
    config: NetworkConfig
    variants: tuple[Variant, ...]
    description: str = ""
    seed_given: bool = False

    def with_overrides(self, seed: int | None = None, mode: str | None = None) -> Scenario:
        config = self.config if seed is None else replace(self.config, seed=seed)
        variants = self.variants if mode is None else tuple(replace(v, mode=mode) for v in self.variants)
        return replace(self, config=config, variants=variants)

    def run_variant(self, variant: Variant) -> SimResult:
        return run(
            self.config,
            variant.script,
            variant.mode,
            unlock=variant.unlock,
            crypto=variant.crypto,
            chain=variant.k - 1,
            abort_on_violation=False,
        )


def _views(raw):
    return None if raw is None else frozenset(raw)


def _action(raw: dict):
    kind = raw["action"]
    if kind == "equivocate":
        return Equivocate(raw["view"], tuple(tuple(g) for g in raw["groups"]))
    if kind == "withhold":
        return Withhold(raw["kind"], _views(raw.get("views")), _views(raw.get("targets")))
    if kind == "delay":
        return Delay(
            raw["kind"], _views(raw.get("views")), _views(raw.get("targets")), raw.get("ticks", 0), raw.get("until")
        )
    if kind == "double_vote":
        return DoubleVote(_views(raw.get("views")))
    return StaleNewView()


def _role(raw: dict):
    if raw["role"] == "crash":
        return CrashAt(raw["view"])
    if raw["role"] == "byzantine":
        return Byzantine(tuple(_action(a) for a in raw["actions"]))
    return Honest()


def _roles(raw: dict) -> dict:
    return {int(r): _role(spec) for r, spec in raw.items()}


def _expect(raw: dict) -> Expectation:
    heights = raw.get("heights", {})
    cov = raw.get("commit_of_view")
    return Expectation(
        heights_min=heights.get("min"),
        heights_max=heights.get("max"),
        commit_view=cov["view"] if cov else None,
        commit_exactly=cov.get("exactly") if cov else None,
        commit_exact_set=bool(cov) and "exactly" in cov,
        commit_at_most=cov.get("at_most") if cov else None,
        first_commit_within=raw.get("first_commit_within"),
        audit_ok=raw.get("audit_ok"),
    )


def parse_scenario(data: dict) -> Scenario:
    """Validate ``data`` against the schema and build a Scenario."""
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"scenario {where}: {exc.message}") from None
    net = dict(data["network"])
    parts = tuple(Partition(tuple(p["members"]), p["start"], p["end"]) for p in net.pop("partitions", ()))
    config = NetworkConfig(**net, partitions=parts).validate()
    links = tuple(
        LinkDelay(l["kind"], l.get("src"), l.get("dst"), _views(l.get("views")), l["ticks"]) for l in data.get("links", ())
    )
    base_roles = _roles(data.get("roles", {}))
    base_proto = data.get("protocol", {})
    variants = []
    for raw in data.get("variants") or [{"label": "default"}]:
        proto = {**base_proto, **raw.get("protocol", {})}
        roles = _roles(raw["roles"]) if "roles" in raw else base_roles
        script = AdversaryScript(roles, links).validate(config.n, config.f, config.delta)
        variants.append(
            Variant(
                label=raw["label"],
                mode=proto.get("mode", STRICT),
                unlock=proto.get("unlock", False),
                k=proto.get("k", 3),
                crypto=proto.get("crypto", "symbolic"),
                script=script,
                expect=_expect(raw.get("expect", {})),
            )
        )
    labels = [v.label for v in variants]
    if len(set(labels)) != len(labels):
        raise ConfigError("duplicate variant labels")
    return Scenario(data["name"], config, tuple(variants), data.get("description", ""), "seed" in net)


def load_scenario(source) -> Scenario:
    """Load from a path, or from a bundled scenario name such as "hidden_lock"."""
    path = Path(source)
    if path.exists():
        text = path.read_text()
    else:
        bundled = resources.files("wendy.simnet") / "scenarios" / f"{path.stem}.json"
        if not bundled.is_file():
            raise ConfigError(f"no such scenario: {source}")
        text = bundled.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario is not valid JSON: {exc}") from None
    return parse_scenario(data)


def bundled_scenarios() -> list[str]:
    root = resources.files("wendy.simnet") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))
