"""Command-line entry point: ``freiman <subcommand> ...``.

Exit codes: 0 success, 2 invalid input or config, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from dataclasses import replace
from pathlib import Path

from . import experiments as ex
from .boolpoly import (base_case_schedule, dist2_shape, ej_profile, from_triangle_count,
                       main_case_schedule, triangle_schedule, vu_bound, vu_bound_from_values)
from .errors import (DegenerateSet, InvalidConfig, LevelCapExceeded, NonPrimeModulus, ScheduleInvalid,
                     TooLarge)
from .homspace import find_isolated_element, solve_hom_space
from .zn import SubsetOfZn

EXIT_OK, EXIT_INVALID, EXIT_BUDGET = 0, 2, 3


def _parse_set(arg: str, N: int | None):
    """A literal like "0,1,3" or "{0, 1, 3}", or a path to a JSON {"N": .., "A": [..]} file."""
    path = Path(arg)
    if path.is_file():
        text = path.read_text()
        try:
            d = json.loads(text)
            return int(d.get("N", N)), [int(x) for x in d["A"]]
        except (json.JSONDecodeError, AttributeError, TypeError):
            members = [int(x) for x in re.findall(r"-?\d+", text)]
    else:
        members = [int(x) for x in re.findall(r"-?\d+", arg)]
    if N is None:
        raise InvalidConfig("--N is required for a literal set")
    return N, members


def _load_config(args) -> ex.ExperimentConfig:
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise InvalidConfig(f"cannot read config: {exc}") from exc
        cfg = ex.ExperimentConfig.from_json(text)
    else:
        cfg = ex.ExperimentConfig(N_list=(101,), alpha_list=(0.4, 0.8))
    over = {}
    if args.seed is not None:
        over["master_seed"] = args.seed
    if args.trials is not None:
        over["trials"] = args.trials
    if getattr(args, "levels", None) is not None:
        over["level"] = args.levels
    return replace(cfg, **over) if over else cfg


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_rank(args):
    N, members = _parse_set(args.set, args.N)
    A = SubsetOfZn.from_members(N, [m % N for m in members])
    res = solve_hom_space(A)
    out = {"N": N, "A": list(A), "dimension": res.dimension, "rank": res.rank}
    if len(A) >= 3:
        out["linear"] = res.rank == 1
        out["isolated"] = find_isolated_element(A)
    if args.basis:
        out["basis"] = res.to_dict()["basis"]
    _emit(json.dumps(out) + "\n", args.out)


def _run_sweep(args, fn, columns):
    cfg = _load_config(args)
    rows, records = fn(cfg)
    _emit(ex.write_csv(columns, rows, args.deterministic), args.out)
    if args.jsonl:
        Path(args.jsonl).write_text(ex.records_to_jsonl(records))


def cmd_vu(args):
    rows = []
    if args.kind == "triangle":
        P = from_triangle_count(args.n)
        args.p = args.p if args.p is not None else args.n ** (-2 / 3)
        E = ej_profile(P, args.p)
        sched = triangle_schedule(args.n, args.C, args.a)
        dev, prob = vu_bound(P, sched, args.p, n_log=args.n)
    else:
        N = float(args.N)
        if args.kind == "base":
            p = N ** (-4 / 9 + args.eps)
            E = dist2_shape(N, p, 4, args.C)
            sched = base_case_schedule(N, p, args.C, args.a)
        else:
            E = [args.C * N ** args.eps] + [args.C] * args.k
            sched = main_case_schedule(N, args.eps, args.k, args.C)
        dev, prob = vu_bound_from_values(sched, E, N)
    for j, e in enumerate(E):
        rows.append({"quantity": "E_j", "j": j, "value": float(e)})
    for j, f in enumerate(sched.F):
        rows.append({"quantity": "F_j", "j": j, "value": float(f)})
    rows += [{"quantity": "lambda", "value": sched.lam},
             {"quantity": "deviation", "value": dev},
             {"quantity": "probability_bound", "value": prob}]
    _emit(ex.write_csv(("quantity", "j", "value"), rows, args.deterministic), args.out)


def cmd_distreport(args):
    rows = ex.dist_bound_report(args.N, args.p, tuple(args.abc), args.budget)
    _emit(ex.write_csv(ex.DIST_COLUMNS, rows, args.deterministic), args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="freiman", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--deterministic", action="store_true", help="omit the timestamp line")

    p = sub.add_parser("rank", parents=[common], help="Freiman rank of one set")
    p.add_argument("set", help='literal such as "0,1,3" or a file')
    p.add_argument("--N", type=int)
    p.add_argument("--basis", action="store_true")
    p.set_defaults(func=cmd_rank)

    sweeps = [("sweep", ex.sweep_linearity, ex.SWEEP_COLUMNS),
              ("lowerbound", ex.lower_bound_experiment, ex.LOWER_COLUMNS),
              ("lambda", ex.lambda_threshold_experiment, ex.LAMBDA_COLUMNS)]
    for name, fn, cols in sweeps:
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--config")
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--levels", type=int, help="top level i for the lambda sweep")
        p.add_argument("--jsonl", help="per-trial records")
        p.set_defaults(func=lambda a, fn=fn, cols=cols: _run_sweep(a, fn, cols))

    p = sub.add_parser("vu", parents=[common], help="E_j profile and Vu bound for a named schedule")
    p.add_argument("--kind", choices=("triangle", "base", "main"), default="triangle")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--p", type=float, help="edge density; n^(-2/3) by default")
    p.add_argument("--N", type=float, default=math.exp(100))
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--a", type=float, default=1.0)
    p.set_defaults(func=cmd_vu)

    p = sub.add_parser("distreport", parents=[common], help="measured dist constants")
    p.add_argument("--N", type=int, nargs="+", default=[13, 17])
    p.add_argument("--p", type=float)
    p.add_argument("--abc", type=int, nargs=3, default=[0, 1, 3])
    p.add_argument("--budget", type=int, default=60_000_000)
    p.set_defaults(func=cmd_distreport)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (InvalidConfig, NonPrimeModulus, DegenerateSet, ScheduleInvalid, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (TooLarge, LevelCapExceeded) as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
