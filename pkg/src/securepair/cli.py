"""Command-line front end.

Subcommands cover the full episode pipeline: build a coded caching
system, inject erasures, plan the broadcast budget, execute repair,
audit eavesdropper leakage, report capacities, and sweep random
episodes into a CSV.  Every randomized step takes an explicit 64-bit
seed; identical (config, seed) runs produce byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import random
import sys
from dataclasses import dataclass
from typing import Optional

from . import caching, exact, repair, secrecy
from .errors import (
    BoundOverflowError,
    ConstructionError,
    FieldTooSmallError,
    InfeasiblePatternError,
    RepairError,
    SchemaError,
    SearchExhaustedError,
    SecurePairError,
)
from .fields import FieldMatrix, PrimeField

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_SCHEMA = 2
EXIT_INFEASIBLE = 3
EXIT_AUDIT = 4

OUT_DIR_ENV = "SECUREPAIR_OUT_DIR"

SEED_BITS = 64


def _resolve(path: str) -> str:
    if os.path.isabs(path):
        return path
    base = os.environ.get(OUT_DIR_ENV)
    return os.path.join(base, path) if base else path


def _write(path: str, text: str) -> None:
    full = _resolve(path)
    parent = os.path.dirname(full)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(full, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _read(path: str) -> str:
    with open(_resolve(path), "r", encoding="utf-8") as fh:
        return fh.read()


def _parse_indices(spec: str) -> tuple:
    spec = spec.strip()
    if not spec:
        return ()
    return tuple(int(x) for x in spec.split(","))


def _dump(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def cmd_build(args) -> int:
    config = caching.SystemConfig(n=args.n, k=args.k, t=args.t, q=args.field)
    payload = _parse_indices(args.payload) if args.payload else None
    system = caching.build_system(
        config, seed=args.seed, systematic=args.systematic, payload=payload
    )
    _write(args.out, caching.system_to_json(system))
    print(f"wrote {args.out}: ({config.n},{config.k}) system, t={config.t}, q={config.q}")
    return EXIT_OK


def cmd_build_exact(args) -> int:
    field = PrimeField(args.field) if args.field else None
    code = exact.build_exact(args.k, field=field, seed=args.seed)
    _write(args.out, exact.code_to_json(code))
    print(f"wrote {args.out}: exact-repair code k={code.k}, q={code.field.p}")
    return EXIT_OK


def cmd_erase(args) -> int:
    system = caching.system_from_json(_read(args.system))
    cfg = system.config
    if args.surviving:
        kept = []
        for part in args.surviving.split(";"):
            kept.append(_parse_indices(part))
        pattern = repair.ErasurePattern(tuple(kept), cfg.t)
    else:
        pattern = _random_pattern(cfg, args.prob, random.Random(args.seed))
    if pattern.n != cfg.n:
        raise SchemaError(f"pattern covers {pattern.n} nodes, system has {cfg.n}")
    if pattern.total_surviving < cfg.m:
        raise InfeasiblePatternError(
            f"only {pattern.total_surviving} packets survive; file of {cfg.m} is lost"
        )
    _write(args.out, repair.pattern_to_json(pattern))
    print(f"wrote {args.out}: {pattern.total_erased} packets erased")
    return EXIT_OK


def _random_pattern(cfg, prob: float, rng: random.Random) -> repair.ErasurePattern:
    for _ in range(32):
        kept = tuple(
            tuple(j for j in range(cfg.t) if rng.random() >= prob) for _ in range(cfg.n)
        )
        pattern = repair.ErasurePattern(kept, cfg.t)
        if pattern.total_surviving >= cfg.m:
            return pattern
    # erasure rate too aggressive to keep the file; leave the system intact
    return repair.ErasurePattern(tuple(tuple(range(cfg.t)) for _ in range(cfg.n)), cfg.t)


def cmd_plan(args) -> int:
    system = caching.system_from_json(_read(args.system))
    cfg = system.config
    pattern = repair.pattern_from_json(_read(args.pattern), t=cfg.t)
    formula = repair.min_broadcasts_formula(pattern, cfg.k)
    oracle = repair.min_broadcasts_bruteforce(pattern, cfg.k)
    plan = repair.allocate_transmissions(pattern, cfg.k)
    print(f"minimum broadcasts: formula={formula} oracle={oracle}")
    print(f"allocation r = {list(plan.counts)} (total {plan.total})")
    print("feasibility over all k-subsets:")
    from itertools import combinations

    for subset in combinations(range(cfg.n), cfg.k):
        need = cfg.m - sum(pattern.counts[i] for i in subset)
        have = plan.total - sum(plan.counts[i] for i in subset)
        print(f"  D={list(subset)}: outside broadcasts {have} >= required {max(need, 0)}")
    if args.out:
        _write(args.out, repair.plan_to_json(plan))
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_repair(args) -> int:
    if args.mode == "exact-uv":
        code = exact.code_from_json(_read(args.system))
        result = exact.repair_exact(code, args.u, args.v)
        doc = {
            "schema_version": 1,
            "broadcast_values": list(result.broadcast_values),
            "broadcast_matrix": result.broadcast_matrix.to_lists(),
            "recovered_systematic": list(result.recovered_systematic),
            "recovered_parity": list(result.recovered_parity),
        }
        _write(args.out, _dump(doc))
        print(f"wrote {args.out}: {result.total} broadcasts, exact recovery verified")
        return EXIT_OK

    system = caching.system_from_json(_read(args.system))
    cfg = system.config
    pattern = repair.pattern_from_json(_read(args.pattern), t=cfg.t)
    plan = repair.plan_from_json(_read(args.plan), cfg.field)
    outcome = repair.functional_repair(
        system, pattern, plan, seed=args.seed, exact=args.exact
    )
    _write(args.out, caching.system_to_json(outcome.system))
    transcript = args.transcript or args.out + ".transcript.json"
    _write(
        transcript,
        _dump(
            {
                "schema_version": 1,
                "r": list(plan.counts),
                "gamma": plan.total,
                "broadcast_matrix": outcome.broadcasts.to_lists(),
                "attempts": outcome.attempts,
            }
        ),
    )
    print(f"wrote {args.out} and {transcript} (attempt {outcome.attempts})")
    return EXIT_OK


def cmd_audit(args) -> int:
    system = caching.system_from_json(_read(args.system))
    cfg = system.config
    plan = repair.plan_from_json(_read(args.plan), cfg.field)
    partition = secrecy.SecretPartition(
        _parse_indices(args.secrets), _parse_indices(args.keys)
    )
    partition.validate(cfg.m)
    view = secrecy.eavesdropper_view(system, plan)
    if args.scope == "universal":
        views = secrecy._candidate_views(system, plan, "universal", None)
        worst = None
        for w in views:
            candidate = secrecy.audit(secrecy.EavesdropperView(w, cfg.m), partition)
            if worst is None or candidate.leakage_qary > worst.leakage_qary:
                worst = candidate
        result = worst
    else:
        result = secrecy.audit(view, partition)
    _write(args.out, _dump(result.to_dict()))
    print(f"wrote {args.out}: leakage={result.leakage_qary}, strong={result.strong_secure}")
    secure = result.strong_secure if args.mode == "strong" else all(result.weak_flags)
    return EXIT_OK if secure else EXIT_AUDIT


def cmd_capacity(args) -> int:
    gamma_min = args.gamma_min if args.gamma_min is not None else args.gamma
    report = secrecy.capacity_report(args.m, args.gamma, gamma_min)
    text = _dump(report.to_dict())
    print(text, end="")
    if args.out:
        _write(args.out, text)
    return EXIT_OK


@dataclass
class EpisodeRecord:
    episode: int
    seed: int
    erased: int
    gamma_formula: str
    gamma_oracle: int
    allocation: str
    repair_ok: bool
    attempts: int
    system_changed: bool
    leakage_qary: int
    strong_secure: bool
    weak_all: bool


def run_episode(config: caching.SystemConfig, seed: int, erase_prob: float, index: int) -> EpisodeRecord:
    rng = random.Random(seed)
    system = caching.build_system(config, seed=rng.getrandbits(SEED_BITS))
    pattern = _random_pattern(config, erase_prob, rng)
    formula = repair.min_broadcasts_formula(pattern, config.k)
    oracle = repair.min_broadcasts_bruteforce(pattern, config.k)
    plan = repair.allocate_transmissions(pattern, config.k)
    repair_ok = True
    attempts = 0
    outcome = None
    try:
        outcome = repair.functional_repair(system, pattern, plan, seed=rng.getrandbits(SEED_BITS))
        attempts = outcome.attempts
    except RepairError:
        repair_ok = False
    if outcome is not None and outcome.broadcasts.nrows >= 0:
        view = secrecy.EavesdropperView(outcome.broadcasts, config.m)
    else:
        view = secrecy.EavesdropperView(FieldMatrix(config.field, ()), config.m)
    partition = secrecy.SecretPartition.all_secret(config.m)
    result = secrecy.audit(view, partition)
    return EpisodeRecord(
        episode=index,
        seed=seed,
        erased=pattern.total_erased,
        gamma_formula=str(formula),
        gamma_oracle=oracle,
        allocation="|".join(str(c) for c in plan.counts),
        repair_ok=repair_ok,
        attempts=attempts,
        system_changed=outcome is not None
        and outcome.system.coding_matrix != system.coding_matrix,
        leakage_qary=result.leakage_qary,
        strong_secure=result.strong_secure,
        weak_all=all(result.weak_flags) if result.weak_flags else True,
    )


def cmd_simulate(args) -> int:
    config = caching.SystemConfig(n=args.n, k=args.k, t=args.t, q=args.field)
    master = random.Random(args.seed)
    seeds = [master.getrandbits(SEED_BITS) for _ in range(args.episodes)]
    records = [
        run_episode(config, seed, args.erase_prob, idx) for idx, seed in enumerate(seeds)
    ]
    records.sort(key=lambda r: r.episode)
    fields = list(EpisodeRecord.__dataclass_fields__)
    full = _resolve(args.out)
    parent = os.path.dirname(full)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(full, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fields)
        for rec in records:
            writer.writerow([getattr(rec, f) for f in fields])
    ok = sum(1 for r in records if r.repair_ok)
    print(f"wrote {args.out}: {len(records)} episodes, {ok} repairs succeeded")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="securepair",
        description="secure partial repair in MDS-coded caching networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=0, help="64-bit RNG seed")

    p = sub.add_parser("build", help="construct a coded caching system")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--field", type=int, required=True, help="prime field size q")
    p.add_argument("--systematic", action="store_true")
    p.add_argument("--payload", help="comma-separated source symbols")
    p.add_argument("--out", required=True)
    add_common(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("build-exact", help="construct the 2k-node exact-repair code")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--field", type=int, help="prime q (default: smallest admissible)")
    p.add_argument("--out", required=True)
    add_common(p)
    p.set_defaults(func=cmd_build_exact)

    p = sub.add_parser("erase", help="inject an erasure pattern")
    p.add_argument("--system", required=True)
    p.add_argument("--surviving", help="per-node kept indices, e.g. '0,1;0,1;0;0'")
    p.add_argument("--prob", type=float, default=0.0, help="per-packet erasure probability")
    p.add_argument("--out", required=True)
    add_common(p)
    p.set_defaults(func=cmd_erase)

    p = sub.add_parser("plan", help="budget and allocate repair broadcasts")
    p.add_argument("--system", required=True)
    p.add_argument("--pattern", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("repair", help="execute a repair round")
    p.add_argument("--system", required=True)
    p.add_argument("--pattern")
    p.add_argument("--plan")
    p.add_argument("--mode", choices=["functional", "exact-uv"], default="functional")
    p.add_argument("--u", type=int, help="erased systematic column (exact-uv, 1-based)")
    p.add_argument("--v", type=int, help="erased parity column (exact-uv, 1-based)")
    p.add_argument("--exact", action="store_true", help="solve for the original vectors")
    p.add_argument("--out", required=True)
    p.add_argument("--transcript")
    add_common(p)
    p.set_defaults(func=cmd_repair)

    p = sub.add_parser("audit", help="audit eavesdropper leakage of a plan")
    p.add_argument("--system", required=True)
    p.add_argument("--plan", required=True)
    p.add_argument("--secrets", required=True, help="comma-separated secret coordinates")
    p.add_argument("--keys", default="", help="comma-separated key coordinates")
    p.add_argument("--mode", choices=["strong", "weak"], default="strong")
    p.add_argument("--scope", choices=["fixed", "universal"], default="fixed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("capacity", help="secrecy capacities and field bounds")
    p.add_argument("--m", type=int, required=True, help="file size in packets")
    p.add_argument("--gamma", type=int, required=True, help="broadcast count")
    p.add_argument("--gamma-min", type=int, help="minimum broadcast count (default: gamma)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("simulate", help="run seeded end-to-end episodes to CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--field", type=int, required=True)
    p.add_argument("--episodes", type=int, default=10)
    p.add_argument("--erase-prob", type=float, default=0.2)
    p.add_argument("--out", required=True)
    add_common(p)
    p.set_defaults(func=cmd_simulate)

    return parser


_EXIT_CODES = (
    (SchemaError, EXIT_SCHEMA),
    ((InfeasiblePatternError, ConstructionError, FieldTooSmallError, RepairError), EXIT_INFEASIBLE),
    ((SearchExhaustedError, BoundOverflowError), EXIT_AUDIT),
    (SecurePairError, EXIT_ERROR),
)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SecurePairError, ValueError, OSError) as exc:
        code = EXIT_ERROR
        for types, candidate in _EXIT_CODES:
            if isinstance(exc, types):
                code = candidate
                break
        record = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
