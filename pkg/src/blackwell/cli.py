"""Command-line front end.

Exit status is 0 on success, 1 on a domain error (bad document, unsolvable
request) and 2 on a usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import examples
from .finite import backward_induction, best_response, expected_payoff
from .limits import value_bracket
from .model import FINITE, MATRIX, PLAYER_I, PLAYER_II, FiniteStateStrategy, GameSpec
from .simulate import simulate
from .spec_format import SpecError, format_number, load_game, parse_game, parse_strategy, serialize


class DomainError(Exception):
    pass


def _num(v):
    return float(v)


def _dist(spec: GameSpec, owner: str, row) -> dict:
    return {m: format_number(Fraction(p)) if isinstance(p, Fraction) else float(p)
            for m, p in zip(spec.alphabets.moves_of(owner), row)}


def _load_game(path: str) -> GameSpec:
    try:
        return load_game(path)
    except SpecError as e:
        raise DomainError(f"{path}:{e.line}:{e.col}: {e.message}") from None
    except OSError as e:
        raise DomainError(f"{path}: {e.strerror}") from None


def _load_strategy(path: str, spec: GameSpec, owner: str):
    if path == "uniform" and not os.path.exists(path):
        return FiniteStateStrategy.uniform_strategy(owner, spec.alphabets)
    try:
        with open(path, encoding="utf-8") as fh:
            strat = parse_strategy(fh.read(), spec.alphabets)
    except SpecError as e:
        raise DomainError(f"{path}:{e.line}:{e.col}: {e.message}") from None
    except OSError as e:
        raise DomainError(f"{path}: {e.strerror}") from None
    if strat.owner != owner:
        raise DomainError(f"{path}: expected a strategy for player {owner}, got player {strat.owner}")
    return strat


def _finite_only(spec: GameSpec, what: str):
    if spec.kind not in (FINITE, MATRIX) and what:
        raise DomainError(f"{what} needs --depth for {spec.kind} games")


# ---------------------------------------------------------------------------
# subcommands; each returns (payload, human lines)

def cmd_solve(args):
    spec = _load_game(args.game)
    if spec.kind not in (FINITE, MATRIX):
        raise DomainError(f"{args.game}: {spec.kind} games have no exact solver; use 'bracket'")
    rep = backward_induction(spec, exact=args.exact, tol=args.tol)
    sI = rep.strategy_I.distribution(rep.strategy_I.initial())
    sII = rep.strategy_II.distribution(rep.strategy_II.initial())
    payload = {
        "value": _num(rep.value),
        "strategies": {"I": _dist(spec, PLAYER_I, sI), "II": _dist(spec, PLAYER_II, sII)},
        "diagnostics": {"horizon": rep.horizon, "kind": spec.kind, "exact": args.exact,
                        "states_solved": len(rep.solutions)},
    }
    if args.exact:
        payload["diagnostics"]["value_exact"] = format_number(rep.value)
    fmt = lambda d: ", ".join(f"{m}: {p}" for m, p in d.items())
    lines = [f"game       {spec.name} ({spec.kind})",
             f"value      {format_number(rep.value) if args.exact else _num(rep.value)}",
             f"player I   {fmt(payload['strategies']['I'])}",
             f"player II  {fmt(payload['strategies']['II'])}"]
    if args.strategies:
        payload["strategies"]["I_full"] = serialize(rep.strategy_I)
        payload["strategies"]["II_full"] = serialize(rep.strategy_II)
        lines += ["", serialize(rep.strategy_I), serialize(rep.strategy_II)]
    return payload, lines


def cmd_bracket(args):
    spec = _load_game(args.game)
    trace = value_bracket(spec, args.depth, k_max=args.k_max, tol=args.tol, exact=args.exact)
    rows = [{"depth": b.depth, "lower": _num(b.lower), "upper": _num(b.upper),
             "estimate": _num(e)} for b, e in zip(trace.brackets, trace.estimates)]
    payload = {"bracket_trace": rows,
               "diagnostics": {"verdict": trace.verdict, "kind": spec.kind, "k_max": trace.k}}
    lines = [f"{'depth':>5}  {'lower':>10}  {'upper':>10}  {'estimate':>10}"]
    lines += [f"{r['depth']:>5}  {r['lower']:>10.6f}  {r['upper']:>10.6f}  {r['estimate']:>10.6f}"
              for r in rows]
    lines.append(f"verdict: {trace.verdict}")
    return payload, lines


def cmd_evaluate(args):
    spec = _load_game(args.game)
    sigma = _load_strategy(args.sigma, spec, PLAYER_I)
    tau = _load_strategy(args.tau, spec, PLAYER_II)
    _finite_only(spec, "evaluate" if args.depth is None else "")
    v = expected_payoff(spec, sigma, tau, depth=args.depth)
    if not args.exact:
        v = float(v)
    payload = {"value": _num(v), "diagnostics": {"exact": format_number(v) if args.exact else None}}
    return payload, [f"expected payoff  {format_number(v) if args.exact else v}"]


def cmd_best_response(args):
    spec = _load_game(args.game)
    if (args.sigma is None) == (args.tau is None):
        raise UsageError("best-response needs exactly one of --sigma and --tau")
    fixed = (_load_strategy(args.sigma, spec, PLAYER_I) if args.sigma is not None
             else _load_strategy(args.tau, spec, PLAYER_II))
    _finite_only(spec, "best-response" if args.depth is None else "")
    resp, v = best_response(spec, fixed, depth=args.depth, tol=args.tol)
    text = serialize(resp)
    payload = {"value": _num(v), "strategies": {resp.owner: text},
               "diagnostics": {"fixed": fixed.owner, "value_exact": format_number(v)
                               if not isinstance(v, float) else None}}
    return payload, [f"value of fixed strategy  {format_number(v) if not isinstance(v, float) else v}",
                     "", text.rstrip("\n")]


def cmd_simulate(args):
    spec = _load_game(args.game)
    sigma = _load_strategy(args.sigma, spec, PLAYER_I)
    tau = _load_strategy(args.tau, spec, PLAYER_II)
    mean, se = simulate(spec, sigma, tau, args.rollouts, args.depth, args.seed, args.workers)
    payload = {"mean": mean, "diagnostics": {"std_error": None if se != se else se,
                                             "rollouts": args.rollouts}}
    return payload, [f"mean       {mean:.6f}", f"std error  {se:.6f}", f"rollouts   {args.rollouts}"]


def cmd_validate(args):
    results = []
    for path in args.files:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise DomainError(f"{path}: {e.strerror}") from None
        first = next((ln.split("#", 1)[0].strip() for ln in text.splitlines()
                      if ln.split("#", 1)[0].strip()), "")
        try:
            if first.startswith("strategy"):
                strat = parse_strategy(text)
                results.append({"file": path, "type": "strategy", "owner": strat.owner})
            else:
                spec = parse_game(text)
                results.append({"file": path, "type": "game", "kind": spec.kind})
        except SpecError as e:
            raise DomainError(f"{path}:{e.line}:{e.col}: {e.message}") from None
    return {"diagnostics": {"files": results}}, [f"{r['file']}: ok ({r['type']})" for r in results]


def cmd_example(args):
    name = args.name
    if name in examples.GAMES:
        text = serialize(examples.GAMES[name]())
    elif name == "stop-sigma":
        text = serialize(examples.stop_sigma(args.n))
    elif name == "never-stop":
        text = serialize(examples.never_stop())
    else:
        raise UsageError(f"unknown example {name!r}")
    return {"document": text}, [text.rstrip("\n")]


class UsageError(Exception):
    pass


EXAMPLE_NAMES = sorted(examples.GAMES) + ["never-stop", "stop-sigma"]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print one JSON object")
    common.add_argument("--tol", type=float, default=1e-9, help="numeric tolerance")
    common.add_argument("--exact", action="store_true", help="rational arithmetic")

    p = argparse.ArgumentParser(prog="blackwell", description="Solve and simulate Blackwell games.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="value and optimal strategies of a finite game")
    s.add_argument("game")
    s.add_argument("--strategies", action="store_true", help="also print full strategy documents")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("bracket", parents=[common], help="value brackets by truncation depth")
    s.add_argument("game")
    s.add_argument("--depth", type=int, default=10)
    s.add_argument("--k-max", type=int, default=8)
    s.set_defaults(func=cmd_bracket)

    s = sub.add_parser("evaluate", parents=[common], help="exact expected payoff of a strategy pair")
    s.add_argument("game")
    s.add_argument("--sigma", required=True)
    s.add_argument("--tau", required=True)
    s.add_argument("--depth", type=int)
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("best-response", parents=[common], help="best reply to a fixed strategy")
    s.add_argument("game")
    s.add_argument("--sigma")
    s.add_argument("--tau")
    s.add_argument("--depth", type=int)
    s.set_defaults(func=cmd_best_response)

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo rollouts")
    s.add_argument("game")
    s.add_argument("--sigma", required=True)
    s.add_argument("--tau", required=True)
    s.add_argument("--rollouts", type=int, default=10000)
    s.add_argument("--depth", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("validate", parents=[common], help="check game and strategy documents")
    s.add_argument("files", nargs="+")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("example", parents=[common], help="print a built-in example document")
    s.add_argument("name", choices=EXAMPLE_NAMES)
    s.add_argument("--n", type=int, default=5, help="parameter of stop-sigma")
    s.set_defaults(func=cmd_example)
    return p


def _check_config(parser, args):
    depth = getattr(args, "depth", None)
    if depth is not None and depth < 0:
        parser.error("--depth must be >= 0")
    if args.tol <= 0:
        parser.error("--tol must be > 0")
    if getattr(args, "rollouts", 1) < 1:
        parser.error("--rollouts must be >= 1")
    if getattr(args, "workers", 1) < 1:
        parser.error("--workers must be >= 1")
    if getattr(args, "k_max", 1) < 1:
        parser.error("--k-max must be >= 1")
    if not 0 <= getattr(args, "seed", 0) < 2**64:
        parser.error("--seed must be a 64-bit unsigned integer")
    if getattr(args, "n", 1) < 1:
        parser.error("--n must be >= 1")


def _inputs(args) -> dict:
    skip = {"func", "json", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        _check_config(parser, args)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        payload, lines = args.func(args)
    except UsageError as e:
        print(f"blackwell: error: {e}", file=sys.stderr)
        return 2
    except (DomainError, ValueError) as e:
        print(f"blackwell: {e}", file=sys.stderr)
        return 1
    if args.json:
        out = {"command": args.command, "inputs": _inputs(args)}
        out.update(payload)
        out.setdefault("strategies", None)
        out.setdefault("diagnostics", {})
        print(json.dumps(out, indent=2))
    else:
        print("\n".join(lines))
    return 0


def main(argv=None):
    sys.exit(run(argv))
