"""Command-line entry point: ``wendy {keygen,simulate,liveness,bench-sig}``.

Every subcommand accepts ``--config`` (a JSON file validated against that
subcommand's schema, unknown keys rejected); flags given on the command line
override file values. The seed falls back to the WENDY_SEED environment
variable, then to 0.

Exit codes: 0 success, 2 configuration error, 3 safety violation,
4 acceptance-threshold miss (only with ``--assert``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import jsonschema

from . import bench, liveness
from .crypto import default_ell, encode_public, encode_secret, verify_pop, wendy_keygen
from .crypto.wendysig import MAX_ELL
from .simnet import ConfigError
from .simnet.scenario_file import load_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SAFETY = 3
EXIT_THRESHOLD = 4

U64 = (1 << 64) - 1

KEYGEN_SCHEMA = {
    "type": "object",
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "ell": {"type": "integer", "minimum": 1, "maximum": MAX_ELL},
        "seed": {"type": "integer", "minimum": 0, "maximum": U64},
        "out": {"type": "string"},
    },
    "additionalProperties": False,
}

LIVENESS_SCHEMA = {
    "type": "object",
    "properties": {
        "rules": {"type": "array", "items": {"enum": ["chlc3", "chlc4", "relaxed"]}, "minItems": 1},
        "n": {"type": "integer", "minimum": 1},
        "f": {"type": "integer", "minimum": 0},
        "election": {"enum": list(liveness.ELECTIONS)},
        "trials": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": U64},
        "out": {"type": "string"},
    },
    "additionalProperties": False,
}

BENCH_SCHEMA = {
    "type": "object",
    "properties": {
        "schemes": {"type": "array", "items": {"enum": list(bench.SCHEMES)}, "minItems": 1},
        "sizes": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "ell": {"type": "integer", "minimum": 1, "maximum": MAX_ELL},
        "reps": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": U64},
        "out": {"type": "string"},
    },
    "additionalProperties": False,
}

METRIC_COLUMNS = (
    "variant",
    "mode",
    "unlock",
    "k",
    "committed_heights",
    "first_commit_view",
    "view1_commit_view",
    "view_changes",
    "messages",
    "audit_ok",
    "end_time",
)


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value <= U64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 bits: {text}")
    return value


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from None


def _str_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _file_config(path: str | None, schema: dict) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    try:
        jsonschema.validate(data, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config {where}: {exc.message}") from None
    return data


def _merge(args, file_cfg: dict, defaults: dict) -> dict:
    """Flags beat file values, which beat defaults."""
    out = dict(defaults)
    out.update(file_cfg)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            out[key] = value
    if getattr(args, "seed", None) is None and "seed" not in file_cfg:
        out["seed"] = _env_seed()
    return out


def _env_seed() -> int:
    raw = os.environ.get("WENDY_SEED")
    if raw is None or raw == "":
        return 0
    try:
        return _u64(raw)
    except argparse.ArgumentTypeError as exc:
        raise ConfigError(f"WENDY_SEED: {exc}") from None


def _out_dir(path: str | None) -> Path | None:
    if path is None:
        return None
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


# keygen


def cmd_keygen(args) -> int:
    cfg = _merge(args, _file_config(args.config, KEYGEN_SCHEMA), {"n": 4, "ell": None, "seed": 0, "out": None})
    if cfg["out"] is None:
        raise ConfigError("keygen needs --out DIR")
    n = cfg["n"]
    ell = cfg["ell"] if cfg["ell"] is not None else default_ell(n)
    out = Path(cfg["out"])
    if out.exists() and any(out.iterdir()):
        raise ConfigError(f"output directory {out} is not empty")
    out.mkdir(parents=True, exist_ok=True)
    registry = []
    for i in range(n):
        kp = wendy_keygen(f"{cfg['seed']}:{i}".encode(), ell)
        pub = kp.public()
        pop_ok = all(verify_pop(pk, pop) for pk, pop in pub.all_keys())
        (out / f"replica-{i}.key").write_bytes(encode_secret(kp))
        (out / f"replica-{i}.pub").write_bytes(encode_public(pub))
        registry.append({"replica": i, "public": encode_public(pub).hex(), "pop_ok": pop_ok})
    doc = {"n": n, "ell": ell, "seed": cfg["seed"], "keys": registry}
    (out / "registry.json").write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    bad = [r["replica"] for r in registry if not r["pop_ok"]]
    print(f"wrote {n} key pairs (ell={ell}) and registry.json to {out}")
    if bad:
        print(f"proof-of-possession check failed for replicas {bad}", file=sys.stderr)
        return EXIT_THRESHOLD
    return EXIT_OK


# simulate


def _metrics_row(variant, result) -> dict:
    first = min(result.commit_views.values(), default=None)
    return {
        "variant": variant.label,
        "mode": variant.mode,
        "unlock": int(variant.unlock),
        "k": variant.k,
        "committed_heights": result.committed_heights,
        "first_commit_view": "" if first is None else first,
        "view1_commit_view": result.first_commit_view_of(1) or "",
        "view_changes": result.view_changes,
        "messages": sum(result.message_counts.values()),
        "audit_ok": int(result.audit.ok),
        "end_time": result.end_time,
    }


def cmd_simulate(args) -> int:
    if args.config is None:
        raise ConfigError("simulate needs --config PATH (or a bundled scenario name)")
    scenario = load_scenario(args.config)
    seed = args.seed
    if seed is None and not scenario.seed_given and os.environ.get("WENDY_SEED"):
        seed = _env_seed()
    scenario = scenario.with_overrides(seed=seed, mode=args.mode)
    out = _out_dir(args.out)
    rows = []
    violations = 0
    misses = []
    for variant in scenario.variants:
        result = scenario.run_variant(variant)
        row = _metrics_row(variant, result)
        rows.append(row)
        if not result.audit.ok:
            violations += 1
            for v in result.audit.violations:
                print(f"[{variant.label}] SAFETY VIOLATION {v.kind}: {v.detail}", file=sys.stderr)
        for miss in variant.expect.check(result, scenario.config):
            misses.append(f"[{variant.label}] {miss}")
        if out is not None:
            (out / f"trace-{variant.label}.jsonl").write_text(result.trace_text())
        print(
            f"{scenario.name}/{variant.label}: heights={row['committed_heights']} "
            f"first_commit_view={row['first_commit_view'] or '-'} "
            f"view_changes={row['view_changes']} audit={'ok' if result.audit.ok else 'VIOLATION'}"
        )
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=METRIC_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    if out is not None:
        (out / "metrics.csv").write_text(buf.getvalue())
    if violations:
        return EXIT_SAFETY
    if args.assert_:
        for m in misses:
            print(f"THRESHOLD MISS {m}", file=sys.stderr)
        if misses:
            return EXIT_THRESHOLD
    return EXIT_OK


# liveness


def _closed_form(rule: liveness.CommitRuleModel, n: int, f: int) -> float:
    if rule.relaxed:
        return liveness.expected_rounds_relaxed(n, f)
    return liveness.expected_rounds_chlc((n - f) / n, rule.k)


def cmd_liveness(args) -> int:
    defaults = {"rules": None, "n": 100, "f": 33, "election": liveness.RANDOM, "trials": 100_000, "seed": 0, "out": None}
    cfg = _merge(args, _file_config(args.config, LIVENESS_SCHEMA), defaults)
    rules = cfg["rules"] or ["chlc4", "chlc3", "relaxed"]
    try:
        models = [liveness.CommitRuleModel.parse(r) for r in rules]
        dists = [liveness.monte_carlo(m, cfg["n"], cfg["f"], cfg["election"], cfg["trials"], cfg["seed"]) for m in models]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    stats = liveness.stats_csv(dists)
    out = _out_dir(cfg["out"])
    if out is None:
        sys.stdout.write(stats)
    else:
        (out / "liveness.csv").write_text(stats)
        for d in dists:
            (out / f"cdf-{d.rule.name}.csv").write_text(liveness.cdf_csv(liveness.cdf_export(d)))
        print(f"wrote liveness.csv and {len(dists)} CDF files to {out}")
    if args.assert_:
        misses = []
        if cfg["election"] != liveness.RANDOM:
            misses.append("closed forms assume random election")
        for d in dists:
            if cfg["election"] != liveness.RANDOM:
                break
            ref = _closed_form(d.rule, d.n, d.f)
            err = abs(d.mean - ref) / ref
            if err >= 0.02:
                misses.append(f"{d.rule.name}: mean {d.mean:.4f} vs closed form {ref:.4f} ({err:.2%})")
        for m in misses:
            print(f"THRESHOLD MISS {m}", file=sys.stderr)
        if misses:
            return EXIT_THRESHOLD
    return EXIT_OK


# bench-sig


def cmd_bench_sig(args) -> int:
    defaults = {"schemes": list(bench.SCHEMES), "sizes": [4, 16, 64], "ell": None, "reps": 5, "seed": 0, "out": None}
    cfg = _merge(args, _file_config(args.config, BENCH_SCHEMA), defaults)
    for s in cfg["schemes"]:
        if s not in bench.SCHEMES:
            raise ConfigError(f"unknown scheme {s!r}; choose from {', '.join(bench.SCHEMES)}")
    try:
        rows = bench.bench_sig(cfg["schemes"], cfg["sizes"], cfg["ell"], cfg["reps"], cfg["seed"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    text = bench.rows_csv(rows)
    out = _out_dir(cfg["out"])
    if out is None:
        sys.stdout.write(text)
    else:
        (out / "bench.csv").write_text(text)
        print(f"wrote bench.csv to {out}")
    if args.assert_:
        misses = bench.check_rows(rows)
        for m in misses:
            print(f"THRESHOLD MISS {m}", file=sys.stderr)
        if misses:
            return EXIT_THRESHOLD
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wendy", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, modes=False):
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--seed", type=_u64, help="64-bit seed (default: $WENDY_SEED, else 0)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--assert", dest="assert_", action="store_true", help="exit 4 when a threshold is missed")
        if modes:
            p.add_argument("--mode", choices=("strict", "relaxed"), help="override the commit rule of every variant")

    p = sub.add_parser("keygen", help="generate Wendy key pairs and a public-key registry")
    common(p)
    p.add_argument("--n", type=int, help="number of replicas (default 4)")
    p.add_argument("--ell", type=int, help="bit width of the view-difference keys")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("simulate", help="run a scenario file through the simulator")
    common(p, modes=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("liveness", help="Monte Carlo rounds-to-commit statistics")
    common(p)
    p.add_argument("--rule", dest="rules", type=_str_list, help="comma list of chlc3, chlc4, relaxed")
    p.add_argument("--n", type=int, help="replicas (default 100)")
    p.add_argument("--f", type=int, help="faulty replicas (default 33)")
    p.add_argument("--election", choices=liveness.ELECTIONS, help="leader election (default random)")
    p.add_argument("--trials", type=int, help="number of trials (default 100000)")
    p.set_defaults(func=cmd_liveness)

    p = sub.add_parser("bench-sig", help="signature timing and pairing counts")
    common(p)
    p.add_argument("--scheme", dest="schemes", type=_str_list, help="comma list of bls-multi, bgls, wendy")
    p.add_argument("--sizes", type=_int_list, help="comma list of signer counts (default 4,16,64)")
    p.add_argument("--ell", type=int, help="bit width for Wendy keys")
    p.add_argument("--reps", type=int, help="repetitions per operation (default 5)")
    p.add_argument("--trials", dest="reps", type=int, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_bench_sig)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"wendy {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
