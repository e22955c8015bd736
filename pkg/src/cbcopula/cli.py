"""Command-line interface.

Exit codes: 0 success, 1 invalid input or arguments, 2 file errors,
3 failed verification.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .errors import CopulaError
from .grid import (
    DEFAULT_EXPONENT,
    CopulaGrid,
    derivative_field,
    empirical_checkerboard,
    format_number,
    read_grid,
    read_samples,
    sample_from_grid,
    write_grid,
    write_samples,
)
from .measures import MEASURE_NAMES, compute_measure
from .orders import dp_distance, lo_compare, schur_compare
from .parametric import materialize, parse_family
from .transforms import (
    increasing_rearrangement,
    markov_product,
    reflection,
    upper_product,
    upper_transform,
    upper_transform_field,
)
from .verify import MIN_N, run_suite

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_VERIFY = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _num(x: float) -> float:
    return float(format_number(x))


def _emit_grid(grid: CopulaGrid, out: str | None) -> None:
    if out is None:
        sys.stdout.write(f"N={grid.n}\n")
        for row in grid.mass:
            sys.stdout.write(",".join(format_number(x) for x in row) + "\n")
    else:
        write_grid(grid, out)


def write_heatmap(grid: CopulaGrid, path) -> None:
    """Plain PGM (P2, 8 bit) of the cell masses, top row = largest ``v``,
    plus the mass matrix as CSV next to it."""
    path = Path(path)
    m = np.asarray(grid.mass)[::-1]
    top = float(m.max())
    gray = np.rint(255.0 * m / top).astype(int) if top > 0 else np.zeros(m.shape, int)
    lines = ["P2", f"{grid.n} {grid.n}", "255"]
    lines += [" ".join(str(v) for v in row) for row in gray]
    path.write_text("\n".join(lines) + "\n")
    csv_lines = [",".join(format_number(x) for x in row) for row in grid.mass]
    path.with_suffix(".csv").write_text("\n".join(csv_lines) + "\n")


# -- subcommands -------------------------------------------------------------------


def cmd_gen(args) -> int:
    grid = materialize(parse_family(args.family), args.n)
    _emit_grid(grid, args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    grid = read_grid(args.grid)
    samples = sample_from_grid(grid, args.count, args.seed)
    write_samples(samples, args.out if args.out else sys.stdout)
    return EXIT_OK


def cmd_estimate(args) -> int:
    samples = read_samples(args.samples, pseudo=args.pseudo)
    _emit_grid(empirical_checkerboard(samples, args.exponent), args.out)
    return EXIT_OK


def cmd_transform(args) -> int:
    field = derivative_field(read_grid(args.grid))
    match args.op:
        case "T":
            out = upper_transform(field)
        case "T2":
            out = upper_transform(upper_transform_field(field))
        case "S":
            out = reflection(field)
        case "rearrange":
            out = increasing_rearrangement(field)
    _emit_grid(out, args.out)
    if args.heatmap:
        write_heatmap(out, args.heatmap)
    return EXIT_OK


def cmd_product(args) -> int:
    left = derivative_field(read_grid(args.left))
    right = derivative_field(read_grid(args.right))
    op = upper_product if args.kind == "upper" else markov_product
    _emit_grid(op(left, right), args.out)
    return EXIT_OK


def cmd_measure(args) -> int:
    names = [w.strip() for w in args.which.split(",") if w.strip()]
    grid = read_grid(args.grid)
    field = derivative_field(grid)
    reports = [compute_measure(name, grid, field) for name in names]
    if args.json:
        payload = [dict(asdict(r), value=_num(r.value)) for r in reports]
        print(json.dumps(payload, indent=2))
    else:
        width = max(len(r.name) for r in reports)
        for r in reports:
            print(f"{r.name:<{width}}  {format_number(r.value)}")
    return EXIT_OK


def cmd_compare(args) -> int:
    left, right = read_grid(args.left), read_grid(args.right)
    fl, fr = derivative_field(left), derivative_field(right)
    if args.order == "lo":
        verdict = lo_compare(left, right, args.tol)
    else:
        verdict = schur_compare(fl, fr, args.tol)
    metrics = {}
    for m in filter(None, (w.strip() for w in args.metrics.split(","))):
        if m not in ("d1", "d2"):
            raise CopulaError(f"unknown metric {m!r}; use d1 or d2")
        metrics[m] = _num(dp_distance(fl, fr, float(m[1])))
    w = verdict.witness
    payload = {
        "order": args.order,
        "relation": verdict.relation.value,
        "witness": None if w is None else {"row": w.row, "at": _num(w.at), "magnitude": _num(w.magnitude)},
        "metrics": metrics,
    }
    print(json.dumps(payload, indent=2))
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.n < MIN_N:
        raise CopulaError(f"verify needs --n >= {MIN_N}, got {args.n}")
    report = run_suite(args.n, args.seed)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        for c in report.checks:
            print(f"{c.status}  {c.anchor:<38} {c.name}  ({format_number(c.observed)} vs {format_number(c.bound)})")
        print(f"{report.status}: {sum(c.passed for c in report.checks)}/{len(report.checks)} checks, n={report.grid_n}, seed={report.seed}, {report.elapsed_ms} ms")
    return EXIT_OK if report.passed else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cbcopula", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="materialize a named copula family")
    p.add_argument("--family", required=True, help="gaussian:<rho>, efgm:<theta>, m, w, pi, shuffle:<perm>, tshuffle:<m>")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("sample", help="draw pseudo-observations from a grid")
    p.add_argument("--grid", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("estimate", help="empirical checkerboard copula from samples")
    p.add_argument("--samples", required=True)
    p.add_argument("--exponent", type=float, default=DEFAULT_EXPONENT)
    p.add_argument("--pseudo", action="store_true", help="values are already in (0, 1); skip ranking")
    p.add_argument("--out")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("transform", help="apply T, T2, S or the increasing rearrangement")
    p.add_argument("--grid", required=True)
    p.add_argument("--op", choices=("T", "T2", "S", "rearrange"), required=True)
    p.add_argument("--out")
    p.add_argument("--heatmap", help="PGM path; a CSV matrix is written next to it")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("product", help="upper or Markov product of two grids")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--kind", choices=("upper", "markov"), default="upper")
    p.add_argument("--out")
    p.set_defaults(func=cmd_product)

    p = sub.add_parser("measure", help="dependence measures of a grid")
    p.add_argument("--grid", required=True)
    p.add_argument("--which", default="xi,zeta1", help=", ".join(MEASURE_NAMES))
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("compare", help="order verdict and distances of two grids")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--order", choices=("lo", "schur"), default="lo")
    p.add_argument("--metrics", default="", help="comma list of d1, d2")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--json", action="store_true", help="accepted for symmetry; output is always JSON")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("verify", help="run the verification suite")
    p.add_argument("--n", type=int, default=128)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CopulaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
