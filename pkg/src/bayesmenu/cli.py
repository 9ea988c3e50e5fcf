"""Command-line interface.

Exit status is 0 on success, 1 when a solver fails (or a menu fails
verification) and 2 on invalid input.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import bench as bench_mod
from .agent import menu_value, verify_dsic
from .det_menu import ptas_constant_outcomes, solve_constant_types, solve_two_outcomes
from .errors import CapExceededError, DimensionError, PreconditionError, SolverError
from .generators import (Graph, HardnessParams, RandomParams, gen_hardness,
                         gen_no_maximum_fixture, gen_random)
from .lp import LPError, NumericalError
from .model import (ParseError, instance_to_dict, menu_to_dict, read_instance, read_menu,
                    require_valid, to_fraction, validate, write_menu)
from .rand_menu import simplify_menu, solve_randomized_detailed, sup_upper_bound

EXIT_OK, EXIT_SOLVER, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Raised for bad command-line input; maps to exit status 2."""


def _rational(text: str) -> Fraction:
    try:
        return to_fraction(text, "argument")
    except (ParseError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _load(path: str):
    try:
        inst = read_instance(path)
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    return require_valid(inst)


def _fmt(x) -> str:
    return f"{float(x):.10g} ({x})" if isinstance(x, Fraction) else f"{x:.10g}"


def cmd_validate(args) -> int:
    try:
        inst = read_instance(args.file)
    except FileNotFoundError:
        raise InputError(f"{args.file}: no such file") from None
    report = validate(inst)
    if report.ok:
        print(f"{args.file}: valid ({inst.n_types} types, {inst.n_actions} actions, "
              f"{inst.n_outcomes} outcomes)")
        return EXIT_OK
    for v in report.violations:
        print(f"{args.file}: {v}")
    return EXIT_INPUT


def cmd_solve_det(args) -> int:
    inst = _load(args.file)
    mode = args.mode
    if mode == "auto":
        mode = "two-outcomes" if inst.n_outcomes == 2 else "const-types"
    if mode == "two-outcomes":
        menu, value = solve_two_outcomes(inst)
    elif mode == "const-types":
        menu, value = solve_constant_types(inst, backend=args.backend)
    else:
        menu, value = ptas_constant_outcomes(inst, args.delta, mode=args.ptas_mode,
                                             backend=args.backend)
    print(f"mode: {mode}")
    print(f"value: {_fmt(value)}")
    if args.out:
        write_menu(inst, menu, args.out)
        print(f"menu written to {args.out}")
    else:
        print(json.dumps(menu_to_dict(inst, menu), indent=2))
    return EXIT_OK


def cmd_solve_rand(args) -> int:
    inst = _load(args.file)
    if args.epsilon <= 0:
        raise InputError("--epsilon must be positive")
    result = solve_randomized_detailed(inst, args.epsilon, backend=args.backend,
                                       max_iter=args.max_iter, trace=args.trace)
    menu = simplify_menu(inst, result.menu) if args.simplify else result.menu
    print(f"value: {_fmt(menu_value(inst, menu))}")
    print(f"upper bound: {_fmt(sup_upper_bound(inst, args.epsilon, result))}")
    print(f"iterations: {result.iterations}")
    print(f"dsic: {verify_dsic(inst, menu).ok}")
    if args.out:
        write_menu(inst, menu, args.out)
        print(f"menu written to {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = _load(args.instance)
    try:
        menu = read_menu(inst, args.menu)
    except FileNotFoundError:
        raise InputError(f"{args.menu}: no such file") from None
    report = verify_dsic(inst, menu, args.tol)
    print(f"value: {_fmt(menu_value(inst, menu))}")
    if report.worst is not None:
        print(f"worst slack: {_fmt(report.worst)}")
    for t, s in report.violations:
        print(f"violation: type {inst.types[t]} gains {_fmt(-report.slacks[t, s])} "
              f"by reporting {inst.types[s]}")
    print("DSIC" if report.ok else "not DSIC")
    return EXIT_OK if report.ok else EXIT_SOLVER


def cmd_gen(args) -> int:
    witness = None
    if args.fixture:
        inst = gen_no_maximum_fixture()
    elif args.random:
        nt, na, m = args.random
        if min(nt, na, m) < 1:
            raise InputError("--random needs positive sizes")
        inst = gen_random(RandomParams(nt, na, m, args.seed, args.sparsity))
    else:
        if args.alpha is None:
            raise InputError("--hardness needs --alpha")
        try:
            graph = Graph.read(args.hardness)
        except FileNotFoundError:
            raise InputError(f"{args.hardness}: no such file") from None
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise InputError(f"{args.hardness}: bad graph file ({exc})") from None
        inst, witness, claimed = gen_hardness(HardnessParams(graph, args.alpha, k=args.k))
    text = json.dumps(instance_to_dict(inst), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if witness is not None and args.witness_out:
        write_menu(inst, witness, args.witness_out)
    return EXIT_OK


def cmd_bench(args) -> int:
    directory = Path(args.dir)
    if not directory.is_dir():
        raise InputError(f"{directory}: not a directory")

    def log(row):
        status = row.get("error") or f"rand {row.get('rand_value_e01')}"
        print(f"{row['instance']}: {status} ({row['wall_ms']} ms)", file=sys.stderr)

    report = bench_mod.run_bench(directory, backend=args.backend, log=log)
    bench_mod.write_report(report, args.out)
    print(f"{len(report['rows'])} rows written to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bayesmenu",
        description="Optimal menus of contracts for hidden-action problems with private types.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an instance file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve-det", help="best menu of deterministic contracts")
    p.add_argument("file")
    p.add_argument("--mode", choices=["auto", "two-outcomes", "const-types", "ptas"],
                   default="auto")
    p.add_argument("--delta", type=_rational, default=Fraction(1, 4),
                   help="additive error of the approximation scheme (default 1/4)")
    p.add_argument("--ptas-mode", choices=["assignment_enum", "vertex_enum"],
                   default="assignment_enum")
    p.add_argument("--backend", choices=["rational", "float"], default="rational")
    p.add_argument("--out", help="write the menu here instead of printing it")
    p.set_defaults(func=cmd_solve_det)

    p = sub.add_parser("solve-rand", help="near-optimal menu of randomized contracts")
    p.add_argument("file")
    p.add_argument("--epsilon", type=_rational, required=True)
    p.add_argument("--trace", help="CSV file for the per-iteration log")
    p.add_argument("--out", help="write the menu here")
    p.add_argument("--backend", choices=["rational", "float"], default="rational")
    p.add_argument("--max-iter", type=int, default=10_000)
    p.add_argument("--simplify", action="store_true",
                   help="merge support contracts that induce the same action")
    p.set_defaults(func=cmd_solve_rand)

    p = sub.add_parser("verify", help="check that a menu is DSIC")
    p.add_argument("instance")
    p.add_argument("menu")
    p.add_argument("--tol", type=_rational, default=Fraction(0))
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="generate an instance")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--fixture", choices=["no-maximum"])
    src.add_argument("--random", nargs=3, type=int, metavar=("L", "N", "M"),
                     help="types, actions and outcomes")
    src.add_argument("--hardness", metavar="GRAPH_JSON")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sparsity", type=float, default=0.0)
    p.add_argument("--alpha", type=_rational)
    p.add_argument("--k", type=int, help="degree bound (default: from the graph)")
    p.add_argument("--out", help="output file (default: standard output)")
    p.add_argument("--witness-out", help="where to write the hardness witness menu")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="run every applicable solver on a directory")
    p.add_argument("dir")
    p.add_argument("--out", required=True)
    p.add_argument("--backend", choices=["rational", "float"], default="rational")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (InputError, ParseError, DimensionError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        # invariant violations from validation and bad parameters
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (CapExceededError, SolverError, LPError, NumericalError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
