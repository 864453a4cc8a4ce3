"""fatpoints command line: dim, reduce, oracle, degen, scan, verify-paper."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import oracle, verify
from .cremona import classify, reduce_to_standard, shgh_dim
from .degeneration import FiberError, HypothesisError, build, matching_dim, scan
from .degeneration.fiber import fiber_to_json, render_fiber, validate
from .degeneration.matching import CASES, first_degeneration_dim
from .lattice import DivisorClass, ParseError, format_system, parse_system

OK, FAILED, USAGE, REFUSED = 0, 1, 2, 3
COLUMN_LIMIT = 5000


class CliError(Exception):
    def __init__(self, message: str, code: int = USAGE):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class RunConfig:
    prime: int = oracle.DEFAULT_PRIME
    trials: int = oracle.DEFAULT_TRIALS
    seed: int = 0
    degree_bound: int = 5
    cache_dir: Path = verify.WITNESS_DIR
    use_cache: bool = True
    fmt: str = "text"
    jobs: int = 1
    long: bool = False

    def check(self, max_degree: int = 0) -> None:
        if not oracle.is_prime(self.prime):
            raise CliError(f"--prime {self.prime} is not prime")
        if self.prime <= max_degree:
            raise CliError(f"--prime must exceed the degree {max_degree}")
        if self.trials < 1:
            raise CliError("--trials must be at least 1")
        if self.jobs < 1:
            raise CliError("--jobs must be at least 1")

    @property
    def cache(self) -> oracle.WitnessCache | None:
        return oracle.WitnessCache(self.cache_dir) if self.use_cache else None


def _system(text: str) -> DivisorClass:
    try:
        return parse_system(text)
    except ParseError as exc:
        raise CliError(f"cannot parse {text!r}: {exc}") from exc


def _emit(cfg: RunConfig, payload: dict, text: str) -> None:
    if cfg.fmt == "json":
        print(json.dumps(payload, sort_keys=True, indent=1))
    else:
        print(text)


def cmd_dim(args, cfg: RunConfig) -> int:
    L = _system(args.system)
    res = shgh_dim(L)
    cls = classify(L, degree_bound=cfg.degree_bound)
    payload = {"system": format_system(L), "dim": res.dim, "status": res.status, "class": cls.kind,
               "log": res.log.to_json()}
    text = f"{res.dim} {res.status}\nclass {cls.kind}\n{res.log.render()}"
    _emit(cfg, payload, text)
    return OK



def cmd_reduce(args, cfg: RunConfig) -> int:
    L = _system(args.system)
    final, log = reduce_to_standard(L)
    table = log.render()
    _emit(cfg, {"system": format_system(L), "final": format_system(final), "table": table.splitlines(),
                "log": log.to_json()}, table)
    return OK


def cmd_oracle(args, cfg: RunConfig) -> int:
    L = _system(args.system)
    cfg.check(L.degree)
    cols = oracle.ncols(L.degree)
    if cols > COLUMN_LIMIT and not cfg.long:
        raise CliError(f"{cols} columns exceeds {COLUMN_LIMIT}; pass --long to run it", REFUSED)
    cache = cfg.cache
    res = oracle.generic_dim(L, p=cfg.prime, trials=cfg.trials, seed=cfg.seed, cache=cache)
    p, seed, rank = res.witness
    path = str(cache.path(oracle.witness_key(L, p, seed))) if cache is not None else None
    payload = {"system": format_system(L), "columns": cols, "witness_path": path, **res.to_json()}
    text = f"{res.dim} {res.status} (expected {res.expected}, rank {rank} mod {p}, seed {seed})"
    if res.note:
        text += f"\nnote: {res.note}"
    if path:
        text += f"\nwitness {path}"
    _emit(cfg, payload, text)
    return OK


def cmd_degen(args, cfg: RunConfig) -> int:
    try:
        fib = build(args.stage, args.d, args.m, args.a)
    except HypothesisError as exc:
        raise CliError(f"stage {args.stage} does not apply: {exc}") from exc
    except FiberError as exc:
        raise CliError(str(exc)) from exc
    rep = validate(fib, strict=False)
    payload = {"fiber": fiber_to_json(fib), "valid": rep.ok, "problems": list(rep.problems),
               "euler": rep.euler, "expected_euler": rep.expected_euler}
    text = render_fiber(fib) + "\n" + rep.render()
    if args.ledger:
        ledger = (first_degeneration_dim(args.d, args.m) if args.stage == 1 and args.a == 0
                  else matching_dim(fib))
        payload["ledger"] = ledger.to_json()
        text += "\n" + ledger.render()
    if args.case:
        key = (args.d, args.m)
        if key not in CASES:
            raise CliError(f"no case script for {key}; scripted pairs are {sorted(CASES)}")
        case = CASES[key]()
        payload["case"] = case.to_json()
        text += "\n" + case.render()
    _emit(cfg, payload, text)
    return OK if rep.ok else FAILED


def _ratio(text: str) -> Fraction:
    try:
        r = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise CliError(f"bad ratio {text!r}") from exc
    return r


def cmd_scan(args, cfg: RunConfig) -> int:
    lo = _ratio(args.lo)
    hi = None if args.hi is None else _ratio(args.hi)
    try:
        rows = scan(lo, hi, m_max=args.m_max, coprime=args.coprime, jobs=cfg.jobs)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    bad = [r for r in rows if not r.ok]
    lines = [f"{r.d:>5} {r.m:>4}  {str(r.ratio):>9}  {r.regime:<9} a={'-' if r.a is None else r.a:<4} "
             f"{r.verdict:<12} e={r.expected:<6} {r.route}" + (f"  {r.detail}" if r.detail else "")
             for r in rows]
    lines.append(f"{len(rows)} pairs, {len(bad)} not settled")
    _emit(cfg, {"rows": [r.to_json() for r in rows], "unsettled": len(bad)}, "\n".join(lines))
    return OK if not bad else FAILED


def cmd_verify(args, cfg: RunConfig) -> int:
    cfg.check()
    results = verify.run_suite(args.level, cache_dir=cfg.cache_dir, jobs=cfg.jobs)
    failed = [c for c in results if not c.passed]
    payload = {"level": args.level, "criteria": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                                                 for c in results], "failed": len(failed)}
    text = "\n".join(c.line() for c in results) + f"\n{len(results) - len(failed)}/{len(results)} passed"
    _emit(cfg, payload, text)
    return OK if not failed else FAILED


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prime", type=int, default=oracle.DEFAULT_PRIME)
    common.add_argument("--trials", type=int, default=oracle.DEFAULT_TRIALS)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--bound", type=int, default=5, help="degree bound for negative-curve search")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--long", action="store_true", help="allow rank runs above 5000 columns")
    common.add_argument("--cache-dir", type=Path,
                        default=Path(os.environ.get("FATPOINTS_CACHE", verify.WITNESS_DIR)))
    common.add_argument("--no-cache", action="store_true")

    ap = argparse.ArgumentParser(prog="fatpoints", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dim", parents=[common], help="dimension by Cremona reduction")
    p.add_argument("system", help='e.g. "174; 55^10" or "24; 11^4, [4,4]^2"')
    p.set_defaults(func=cmd_dim)

    p = sub.add_parser("reduce", parents=[common], help="print the reduction table")
    p.add_argument("system")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("oracle", parents=[common], help="rank of the interpolation matrix mod p")
    p.add_argument("system")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("degen", parents=[common], help="build and check a degeneration")
    p.add_argument("d", type=int)
    p.add_argument("m", type=int)
    p.add_argument("a", type=int)
    p.add_argument("--stage", type=int, choices=(1, 2, 3, 4), default=1)
    p.add_argument("--ledger", action="store_true", help="also print the matching ledger")
    p.add_argument("--case", action="store_true", help="also run the script for an exceptional pair")
    p.set_defaults(func=cmd_degen)

    p = sub.add_parser("scan", parents=[common], help="route every (d, m) in a ratio window")
    p.add_argument("lo", help="lower ratio, e.g. 174/55")
    p.add_argument("hi", nargs="?", help="upper ratio (default 4)")
    p.add_argument("--m-max", type=int, default=20)
    p.add_argument("--coprime", action="store_true")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("verify-paper", parents=[common], help="run every acceptance check")
    p.add_argument("--level", choices=("fast", "full"), default="fast")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(args.prime, args.trials, args.seed, args.bound, args.cache_dir, not args.no_cache,
                    args.format, args.jobs, args.long)
    try:
        cfg.check()
        return args.func(args, cfg)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
