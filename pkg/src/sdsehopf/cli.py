"""Command-line front end: ``sdsehopf <verb> ...``.

Exit status: 0 on success, 1 for a negative verdict, 2 for bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import families
from .classify import classify, dep_graph, dilatation_classes, peel_extensions, vertex_levels
from .hopf import format_rational
from .prelie import TableRangeError, check_associative, check_prelie_identity, structure_constants_text
from .sdse import DegenerateSystem, TruncationError, check_hopf, dump_system, load_system, solve_e1, solve_subst
from .series import ParseError

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE = 0, 1, 2


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def _family(args) -> object:
    p = args.params
    if args.family == "cycle":
        return families.Cycle(int(p[0]) if p else 2)
    if args.family == "multicycle":
        return families.Multicycle(tuple(int(x) for x in p))
    if args.family == "complete":
        return families.Complete(tuple(int(x) for x in p))
    if args.family == "intro":
        b = [Fraction(x) for x in p] or [Fraction(2), Fraction(3)]
        return families.intro_fundamental(*b)
    if args.family == "json":
        return families.from_dict(json.loads(p[0]))
    raise ValueError(f"unknown family {args.family!r}")


def cmd_gen(args) -> int:
    S = families.generate(_family(args), args.truncation)
    _write(args.output, dump_system(S))
    return EXIT_OK


def _system(args):
    return load_system(_read(args.input))


def _weight(args, S) -> int:
    return args.N if args.N is not None else S.degree + 1


def cmd_solve(args) -> int:
    S = _system(args)
    solver = solve_subst if args.method == "subst" else solve_e1
    _write(args.output, solver(S, _weight(args, S)).to_text())
    return EXIT_OK


def cmd_check(args) -> int:
    S = _system(args)
    v = check_hopf(S, _weight(args, S), fail_fast=not args.all)
    _write(args.output, v.to_text() + v.table.rows_text())
    return EXIT_OK if v.is_hopf else EXIT_NEGATIVE


def cmd_lambda(args) -> int:
    S = _system(args)
    v = check_hopf(S, _weight(args, S))
    lv = vertex_levels(v.table)
    lines = [v.to_text(), v.table.rows_text()]
    for i in S.indices:
        lines.append(f"level {i} {lv.levels[i]}\n")
        if not isinstance(lv.levels[i], int):
            continue
        for j in S.indices:
            b, c = lv.slopes[(i, j)], lv.intercepts[(i, j)]
            lines.append(f"fit {i} {j} b={format_rational(b)} a~={format_rational(c)}\n")
    _write(args.output, "".join(lines))
    return EXIT_OK if v.is_hopf else EXIT_NEGATIVE


def cmd_classify(args) -> int:
    S = _system(args)
    c = classify(S, N=args.N or 6, full_check=args.full_check)
    _write(args.output, c.to_text())
    return EXIT_NEGATIVE if c.kind == "not_hopf" else EXIT_OK


def cmd_graph(args) -> int:
    S = _system(args)
    G = dep_graph(S)
    if args.dot:
        peel, _ = peel_extensions(S)
        text = G.to_dot(dilatation_classes(S), [x for x, _ in peel])
    else:
        text = "".join(f"{u} -> {w}\n" for u, w in sorted(G.edges))
    _write(args.output, text)
    return EXIT_OK


def cmd_prelie(args) -> int:
    S = _system(args)
    v = check_hopf(S, _weight(args, S))
    if not v.is_hopf:
        _write(args.output, v.to_text())
        return EXIT_NEGATIVE
    bound = v.table.max_n + 1
    out, status = [], EXIT_OK
    if args.check_identity:
        w = check_prelie_identity(v.table, bound)
        out.append(f"pre-Lie identity to grade {bound}: {'ok' if w is None else 'fails'}\n")
        if w is not None:
            out.append(f"witness {w.describe()}\n")
            status = EXIT_NEGATIVE
    if args.check_assoc:
        ok, w = check_associative(v.table, bound)
        out.append(f"associative to grade {bound}: {'yes' if ok else 'no'}\n")
        if w is not None:
            out.append(f"witness {w.describe()}\n")
        affine = S.is_affine()
        out.append(f"all equations affine: {'yes' if affine else 'no'}\n")
        if ok != affine:
            status = EXIT_NEGATIVE
    if not (args.check_identity or args.check_assoc):
        out.append(structure_constants_text(v.table))
    _write(args.output, "".join(out))
    return status


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sdsehopf", description="Exact tools for Dyson-Schwinger systems on rooted trees.")
    sub = ap.add_subparsers(dest="verb", required=True)

    def with_input(p, default_n=None):
        p.add_argument("input", help="system file, or - for stdin")
        p.add_argument("-N", type=_positive, default=default_n, help="weight bound")
        p.add_argument("-o", "--output", help="output path (default stdout)")
        return p

    g = sub.add_parser("gen", help="write a system file for a named family")
    g.add_argument("family", choices=["cycle", "multicycle", "complete", "intro", "json"])
    g.add_argument("params", nargs="*")
    g.add_argument("-N", "--truncation", type=_positive, default=12, help="truncation degree of the equations")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    p = with_input(sub.add_parser("solve", help="homogeneous components X_i(n)"))
    p.add_argument("--method", choices=["e1", "subst"], default="e1")
    p.set_defaults(func=cmd_solve)

    p = with_input(sub.add_parser("check", help="Hopf test and lambda table"))
    p.add_argument("--all", action="store_true", help="keep scanning after the first failure")
    p.set_defaults(func=cmd_check)

    with_input(sub.add_parser("lambda", help="lambda table with levels and affine fits")).set_defaults(func=cmd_lambda)

    p = with_input(sub.add_parser("classify", help="structure recognition"))
    p.add_argument("--full-check", action="store_true", help="also scan the whole system, not only its quotient")
    p.set_defaults(func=cmd_classify)

    p = with_input(sub.add_parser("graph", help="dependence graph"))
    p.add_argument("--dot", action="store_true")
    p.set_defaults(func=cmd_graph)

    p = with_input(sub.add_parser("prelie", help="pre-Lie structure constants and scans"))
    p.add_argument("--check-identity", action="store_true")
    p.add_argument("--check-assoc", action="store_true")
    p.set_defaults(func=cmd_prelie)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, TruncationError, DegenerateSystem, TableRangeError, ValueError, KeyError, OSError) as exc:
        print(f"sdsehopf {args.verb}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
