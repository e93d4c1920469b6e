"""Command line front end.

Subcommands:

  score    score a graph under a mask (default: the full graph)
  solve    search for a best-scoring valid mask
  reduce   compile a formula into a weighted instance graph
  witness  build the witness mask for a satisfying assignment
  verify   run construction self-checks on a compiled instance
  decide   one-in-three satisfiability via the compiled instance

Exit status: 0 on success, 1 when a verification check does not pass,
2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
import warnings
from pathlib import Path

from . import __version__
from .graph import (
    GraphParseError,
    MaskValidityError,
    SubgraphMask,
    dump_graph,
    dump_mask,
    load_graph,
    load_mask,
)
from .reduction import (
    AssignmentError,
    FormulaError,
    compile_formula,
    decide,
    dump_roles,
    parse_assignment,
    parse_formula,
    witness_mask,
)
from .scoring import format_fraction, format_score, score
from .solvers import SearchSpaceError, solve_exact, solve_local
from .verification import ALL_CHECKS, reduction_score, run_checks


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _atomic_write(path: str, text: str) -> None:
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or Path("."), prefix=target.name)
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, target)
    except BaseException:
        os.unlink(tmp)
        raise


def _load_graph_file(path: str):
    return load_graph(_read(path))


def _load_formula_file(path: str):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        formula = parse_formula(_read(path))
    for item in caught:
        print(f"warning: {item.message}", file=sys.stderr)
    return formula


def _print_score(value) -> None:
    print(f"score = {format_score(value)}")
    print(f"S = {format_fraction(value.discrepancy_total)}")


def cmd_score(args: argparse.Namespace) -> int:
    graph = _load_graph_file(args.graph)
    if args.mask:
        mask = load_mask(_read(args.mask), graph)
    else:
        mask = SubgraphMask.full(graph)
    _print_score(score(graph, mask))
    return 0


def cmd_solve(args: argparse.Namespace) -> int:
    graph = _load_graph_file(args.graph)
    if args.exact:
        report = solve_exact(graph, node_limit=args.node_limit)
    else:
        report = solve_local(graph, restarts=args.restarts, seed=args.seed)
    print(f"mask = {report.best_mask.bitstring()}")
    _print_score(report.best_score)
    print(f"nodes = {report.nodes_explored}")
    print(f"optimality = {report.optimality}")
    if args.out:
        _atomic_write(args.out, dump_mask(report.best_mask))
        print(f"wrote {args.out}")
    return 0


def cmd_reduce(args: argparse.Namespace) -> int:
    formula = _load_formula_file(args.formula)
    inst = compile_formula(formula, args.t)
    graph_path = f"{args.out}.graph"
    roles_path = f"{args.out}.roles"
    _atomic_write(graph_path, dump_graph(inst.graph))
    _atomic_write(roles_path, dump_roles(inst))
    free = len(inst.free_edge_ids())
    print(
        f"n = {inst.variable_count}, t = {inst.t}, "
        f"vertices = {inst.graph.vertex_count}, edges = {inst.graph.edge_count}, "
        f"free edges = {free}"
    )
    print(f"wrote {graph_path}")
    print(f"wrote {roles_path}")
    return 0


def cmd_witness(args: argparse.Namespace) -> int:
    formula = _load_formula_file(args.formula)
    assignment = parse_assignment(args.assignment, formula.variable_count)
    inst = compile_formula(formula, args.t)
    mask = witness_mask(formula, args.t, assignment, inst)
    value = reduction_score(inst, mask)
    print(f"mask = {mask.bitstring()}")
    print(f"reduction score = {format_score(value)}")
    print(f"S = {format_fraction(value.discrepancy_total)}")
    if args.out:
        _atomic_write(args.out, dump_mask(mask))
        print(f"wrote {args.out}")
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    formula = _load_formula_file(args.formula)
    checks = tuple(tok.strip() for tok in args.checks.split(",") if tok.strip())
    assignment = None
    if args.assignment:
        assignment = parse_assignment(args.assignment, formula.variable_count)
    try:
        records = run_checks(
            formula,
            args.t,
            checks,
            assignment=assignment,
            mask_samples=args.masks,
            seed=args.seed,
            search_budget=args.budget,
            lemma_samples=args.lemma_samples,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    failed = False
    for rec in records:
        parts = " ".join(f"{k}={v}" for k, v in rec.quantities)
        line = f"check {rec.check} {rec.name}: {rec.status.upper()}"
        if parts:
            line += f" {parts}"
        if rec.details:
            line += f" | {rec.details}"
        print(line)
        failed = failed or rec.status != "pass"
    print(f"instance: {records[0].instance}" if records else "no checks selected")
    return 1 if failed else 0


def cmd_decide(args: argparse.Namespace) -> int:
    formula = _load_formula_file(args.formula)
    report = decide(
        formula,
        node_limit=args.node_limit,
        restarts=args.restarts,
        seed=args.seed,
    )
    print(f"answer = {report.answer}")
    print(f"optimum = {format_score(report.optimum)}")
    print(f"threshold = {report.threshold:.12f}")
    print(
        f"n = {report.variable_count}, t = {report.t}, "
        f"solver = {report.solver}, optimality = {report.optimality}"
    )
    for note in report.notes:
        print(f"note: {note}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--threads",
        type=int,
        default=1,
        help="accepted for interface stability; execution is sequential",
    )

    parser = argparse.ArgumentParser(
        prog="corrsubopt",
        description="correlation subgraph optimisation toolkit",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", parents=[common], help="score a graph under a mask")
    p.add_argument("-g", "--graph", required=True, help="instance graph file")
    p.add_argument("-s", "--mask",
                   help="mask file (bitstring or kept edge ids); default: full graph")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("solve", parents=[common], help="search for a best valid mask")
    p.add_argument("-g", "--graph", required=True, help="instance graph file")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--exact", action="store_true", help="branch and bound")
    mode.add_argument("--local", action="store_true", help="steepest-ascent local search")
    p.add_argument("--restarts", type=int, default=16, help="random restarts for --local")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--node-limit", type=int, default=None,
                   help="stop --exact after this many search nodes")
    p.add_argument("--out", help="write the best mask here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("reduce", parents=[common], help="compile a formula to a graph")
    p.add_argument("-f", "--formula", required=True, help="formula file")
    p.add_argument("-t", type=int, required=True, help="gadget scale, at least 2")
    p.add_argument("-o", "--out", required=True,
                   help="output prefix; writes <prefix>.graph and <prefix>.roles")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("witness", parents=[common],
                       help="witness mask for a satisfying assignment")
    p.add_argument("-f", "--formula", required=True, help="formula file")
    p.add_argument("-t", type=int, required=True, help="gadget scale, at least 2")
    p.add_argument("-a", "--assignment", required=True, help='assignment, e.g. "TFF"')
    p.add_argument("-o", "--out", help="write the witness mask here")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("verify", parents=[common], help="run construction self-checks")
    p.add_argument("-f", "--formula", required=True, help="formula file")
    p.add_argument("-t", type=int, required=True, help="gadget scale, at least 2")
    p.add_argument("--checks", default=",".join(ALL_CHECKS),
                   help=f"comma list from {{{','.join(ALL_CHECKS)}}} (default: all)")
    p.add_argument("--assignment", help="restrict witness checks to this assignment")
    p.add_argument("--masks", type=int, default=100,
                   help="random valid masks per sampled check (default 100)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=5_000_000,
                   help="node budget for the infeasibility search")
    p.add_argument("--lemma-samples", type=int, default=10_000,
                   help="sampled masks for the score upper bound check")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("decide", parents=[common],
                       help="one-in-three satisfiability via the reduction")
    p.add_argument("-f", "--formula", required=True, help="formula file")
    p.add_argument("--node-limit", type=int, default=200_000)
    p.add_argument("--restarts", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_decide)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, GraphParseError, FormulaError, AssignmentError,
            MaskValidityError, SearchSpaceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
