"""Command-line entry point: ``cbcstream <command> ...``.

Exit codes: 0 ok, 2 bad input, 3 runtime failure, 4 no feasible policy,
5 unrealizable code. Every option can also be set through an environment
variable ``CBCSTREAM_<OPTION>`` (e.g. ``CBCSTREAM_SEED=7``).
"""
from __future__ import annotations

import argparse
import itertools
import json
import math
import os
import sys
from pathlib import Path

from . import __version__
from .analysis import moment
from .channel import BscChannel
from .codes.codeset import default_rcpc, load_code_set, parse_rate
from .codes.pe import PeTable, estimate_pe, read_pe_csv, write_pe_csv
from .errors import CbcError, InputError, MissingEntry, NoFeasiblePolicy, UnrealizableCode
from .framing import Policy
from .optimizer import SearchSpace, Solution, compare, enumerate_candidates, solve_p1, solve_p2, solve_p3
from .rdmodel import read_rd_csv
from .sim import TrialConfig, run

ENV_PREFIX = "CBCSTREAM_"
# options that never change results and so stay out of the manifest
_VOLATILE = {"threads", "out", "trials_csv", "func", "command"}


class _Exit(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _manifest(args, inputs: dict) -> dict:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in _VOLATILE}
    return {
        "command": args.command,
        "inputs": {k: str(v) for k, v in inputs.items() if v is not None},
        "config": config,
        "version": __version__,
        "seed": getattr(args, "seed", None),
    }


def _write_text(path, text: str) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _load_code_set(path):
    return default_rcpc() if path is None else load_code_set(path)


def _load_pe(path) -> PeTable:
    return read_pe_csv(path)


def _resolve_eps0(table: PeTable, eps0):
    if eps0 is not None:
        return float(eps0)
    values = table.eps0_values
    return values[0] if len(values) == 1 else None


# -- commands -------------------------------------------------------------

def cmd_pe_estimate(args) -> None:
    code_set = load_code_set(args.code_set)
    rates = [parse_rate(r) for r in args.rates.split(",")] if args.rates else list(code_set.rates)
    for r in rates:
        code_set[r]
    table = PeTable()
    for length in range(1, args.stages + 1):
        for seq in itertools.product(rates, repeat=length):
            for upsilon in args.upsilon:
                for eps0 in args.eps0:
                    entry = estimate_pe(seq, upsilon, eps0, args.trials, args.seed, code_set,
                                        n_r=args.n_r, frame_chunks=args.frame_chunks, workers=args.threads)
                    table.add(seq, upsilon, eps0, entry)
    if args.out in (None, "-"):
        raise _Exit(2, "pe-estimate needs --out (a manifest is written next to it)")
    write_pe_csv(table, args.out)
    _write_text(f"{args.out}.manifest.json", _dump_json(_manifest(args, {"code_set": args.code_set})))


def cmd_optimize(args) -> None:
    code_set = _load_code_set(args.code_set)
    space_json = _read_json(args.space)
    if args.budget_mode:
        space_json["budget_mode"] = args.budget_mode
    table = _load_pe(args.pe)
    if space_json.get("eps0") is None:
        space_json["eps0"] = _resolve_eps0(table, args.eps0)
    space = SearchSpace.from_json(space_json, code_set)
    curve = read_rd_csv(args.rd, args.interpolation)
    cands = list(enumerate_candidates(space, table, curve, code_set))
    problem = args.problem.lower()
    gamma = None
    if problem in ("p2", "p3"):
        if args.gamma_d is None:
            raise _Exit(2, f"{problem} needs --gamma-d")
        if args.gamma_d == "dstar":
            gamma = solve_p1(space, table, curve, code_set, cands).report.mean
        else:
            gamma = float(args.gamma_d)
    if problem == "p1":
        sol = solve_p1(space, table, curve, code_set, cands)
    elif problem == "p2":
        sol = solve_p2(space, table, curve, gamma, code_set, cands)
    else:
        if args.zeta is None:
            raise _Exit(2, "p3 needs --zeta (use 'inf' for the budget-only problem)")
        sol = solve_p3(space, table, curve, gamma, float(args.zeta), code_set, cands)
    out = sol.to_json()
    out["manifest"] = _manifest(args, {"space": args.space, "pe": args.pe, "rd": args.rd,
                                       "code_set": args.code_set})
    _write_text(args.out, _dump_json(out))


def cmd_analyze(args) -> None:
    code_set = load_code_set(args.code_set) if args.code_set else None
    policy = Policy.from_json(_read_json(args.policy), code_set)
    table = _load_pe(args.pe)
    curve = read_rd_csv(args.rd, args.interpolation)
    report = moment(policy, table, curve, args.n, _resolve_eps0(table, args.eps0))
    if args.format == "csv":
        _write_text(args.out, report.to_csv())
        if args.out not in (None, "-"):
            _write_text(f"{args.out}.manifest.json",
                        _dump_json(_manifest(args, {"policy": args.policy, "pe": args.pe, "rd": args.rd})))
        return
    out = report.to_json()
    out["manifest"] = _manifest(args, {"policy": args.policy, "pe": args.pe, "rd": args.rd})
    _write_text(args.out, _dump_json(out))


def cmd_simulate(args) -> None:
    code_set = _load_code_set(args.code_set)
    policy = Policy.from_json(_read_json(args.policy), code_set)
    curve = read_rd_csv(args.rd, args.interpolation)
    table = _load_pe(args.pe) if args.pe else None
    config = TrialConfig(policy, curve, BscChannel(args.eps0, args.seed), args.trials, args.mode, args.seed)
    report = run(config, table, code_set, workers=args.threads)
    out = report.to_json()
    out["eps0"] = args.eps0
    out["manifest"] = _manifest(args, {"policy": args.policy, "rd": args.rd, "pe": args.pe,
                                       "code_set": args.code_set})
    _write_text(args.out, _dump_json(out))
    if args.trials_csv:
        _write_text(args.trials_csv, report.trials_csv())


def cmd_compare(args) -> None:
    base = Solution.from_json(_read_json(args.baseline))
    cand = Solution.from_json(_read_json(args.candidate))
    names = tuple(args.names.split(",")) if args.names else ("baseline", "candidate")
    if len(names) != 2:
        raise _Exit(2, "--names takes exactly two comma-separated labels")
    _write_text(args.out, compare(base, cand, names).to_csv())
    if args.out not in (None, "-"):
        _write_text(f"{args.out}.manifest.json",
                    _dump_json(_manifest(args, {"baseline": args.baseline, "candidate": args.candidate})))


# -- parser ---------------------------------------------------------------

def _float_or_inf(text: str) -> float:
    return math.inf if text.strip().lower() in ("inf", "infinity") else float(text)


def _common(p: argparse.ArgumentParser, seed=True) -> None:
    if seed:
        p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
    p.add_argument("--out", default=None, help="output path ('-' or omitted: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cbcstream", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pe-estimate", help="Monte Carlo P_e table for every code suffix")
    p.add_argument("--code-set", required=True)
    p.add_argument("--rates", default=None, help="comma-separated subset of the code set")
    p.add_argument("--stages", type=int, default=1)
    p.add_argument("--upsilon", type=int, nargs="+", required=True)
    p.add_argument("--eps0", type=float, nargs="+", required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--n-r", type=int, default=16)
    p.add_argument("--frame-chunks", type=int, default=3)
    _common(p)
    p.set_defaults(func=cmd_pe_estimate)

    p = sub.add_parser("optimize", help="solve P1/P2/P3 by exhaustive search")
    p.add_argument("--space", required=True)
    p.add_argument("--pe", required=True)
    p.add_argument("--rd", required=True)
    p.add_argument("--problem", choices=["p1", "p2", "p3"], required=True)
    p.add_argument("--gamma-d", default=None, help="mean-distortion target, or 'dstar' for the P1 optimum")
    p.add_argument("--zeta", type=_float_or_inf, default=None)
    p.add_argument("--code-set", default=None)
    p.add_argument("--eps0", type=float, default=None)
    p.add_argument("--budget-mode", choices=["idealized", "exact"], default=None)
    p.add_argument("--interpolation", choices=["linear", "step"], default="linear")
    _common(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("analyze", help="exact distortion moments of a policy")
    p.add_argument("--policy", required=True)
    p.add_argument("--pe", required=True)
    p.add_argument("--rd", required=True)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--eps0", type=float, default=None)
    p.add_argument("--code-set", default=None)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--interpolation", choices=["linear", "step"], default="linear")
    _common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="Monte Carlo distortion statistics of a policy")
    p.add_argument("--policy", required=True)
    p.add_argument("--rd", required=True)
    p.add_argument("--mode", choices=["end_to_end", "idealized"], default="idealized")
    p.add_argument("--eps0", type=float, required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--pe", default=None)
    p.add_argument("--code-set", default=None)
    p.add_argument("--trials-csv", default=None)
    p.add_argument("--interpolation", choices=["linear", "step"], default="linear")
    _common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="Table-style comparison of two solutions")
    p.add_argument("--baseline", required=True)
    p.add_argument("--candidate", required=True)
    p.add_argument("--names", default=None)
    _common(p, seed=False)
    p.set_defaults(func=cmd_compare)

    for action in sub.choices.values():
        _apply_env(action)
    return parser


def _apply_env(parser: argparse.ArgumentParser) -> None:
    for action in parser._actions:
        if not action.option_strings or action.dest == "help":
            continue
        key = ENV_PREFIX + action.dest.upper()
        if key not in os.environ:
            continue
        raw = os.environ[key]
        if action.nargs in ("+", "*"):
            value = [action.type(v) if action.type else v for v in raw.split()]
        else:
            value = action.type(raw) if action.type else raw
        action.default = value
        action.required = False


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except _Exit as exc:
        print(f"cbcstream: {exc}", file=sys.stderr)
        return exc.code
    except NoFeasiblePolicy as exc:
        print(f"cbcstream: no feasible policy: {exc}", file=sys.stderr)
        return 4
    except UnrealizableCode as exc:
        print(f"cbcstream: {exc}", file=sys.stderr)
        return 5
    except (InputError, MissingEntry, OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"cbcstream: bad input: {exc}", file=sys.stderr)
        return 2
    except (CbcError, Exception) as exc:  # noqa: BLE001
        print(f"cbcstream: failed: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
