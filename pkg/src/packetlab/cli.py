"""Command-line surface: every subcommand emits one canonical JSON document.

Exit codes: 0 success / check passed, 1 domain failure (a check failed, a
basis was inadmissible, a completion impossible), 2 usage or format error.
Outputs are deterministic: same arguments and seed give identical bytes.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import io
from .basis import BasisSpec, check_partition, level_basis, node_costs
from .basis import best_basis as select_best_basis
from .errors import FormatError, PacketLabError
from .filterbank import (
    check_splitting_exact,
    check_splitting_grid,
    complete_bank_grid,
    complete_bank_haar,
    random_unitary,
)
from .lattice import DilationMatrix, digit_set
from .packets import decompose as run_decompose
from .packets import packet_symbol, reconstruct as run_reconstruct

__all__ = ["main"]


class _UsageError(Exception):
    pass


def _parse_matrix(text: str) -> DilationMatrix:
    try:
        rows = json.loads(text)
    except json.JSONDecodeError:
        raise _UsageError(f"matrix must be JSON rows like [[1,1],[1,-1]], got {text!r}") from None
    if isinstance(rows, int):
        rows = [[rows]]
    try:
        return DilationMatrix(rows)
    except (PacketLabError, ValueError, TypeError) as exc:
        raise _UsageError(f"invalid dilation matrix: {exc}") from None


def _parse_cost(text: str):
    name, _, arg = text.partition(":")
    if name in ("entropy", "l1"):
        if arg:
            raise _UsageError(f"cost {name!r} takes no parameter")
        return name
    if name in ("lp", "threshold"):
        try:
            return (name, float(arg))
        except ValueError:
            raise _UsageError(f"cost {name!r} needs a numeric parameter, got {arg!r}") from None
    raise _UsageError(f"unknown cost {text!r} (use entropy, l1, lp:P, threshold:T)")


def _parse_xi(text: str, dim: int) -> np.ndarray:
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise _UsageError(f"bad frequency {text!r}") from None
    if len(parts) != dim:
        raise _UsageError(f"frequency {text!r} has {len(parts)} entries, expected {dim}")
    return np.array(parts)


def _emit(doc: dict, args) -> None:
    text = io.canonical_json(doc)
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _stamp(doc: dict, args) -> dict:
    # rebuilt so schema stays first and the seed is always on record
    out = {"schema": doc["schema"], "seed": getattr(args, "seed", None)}
    out.update((k, v) for k, v in doc.items() if k != "schema")
    return out


def _load_bank(path: str):
    return io.filterbank_from_doc(io.read_doc(path, io.FILTERBANK_SCHEMA))


def _matrix_doc(matrix: DilationMatrix) -> dict:
    da, db = digit_set(matrix), digit_set(matrix, for_transpose=True)
    return {
        "schema": "packetlab-digits-v1",
        "dim": matrix.dim,
        "det_abs": matrix.det_abs,
        "matrix": matrix.A.tolist(),
        "digits_A": [list(d) for d in da.digits],
        "digits_B": [list(d) for d in db.digits],
    }


def _cmd_digits(args) -> int:
    _emit(_stamp(_matrix_doc(_parse_matrix(args.matrix)), args), args)
    return 0


def _cmd_check_filters(args) -> int:
    fb = _load_bank(args.bank)
    tol = args.tol if args.tol is not None else 1e-12
    grid_tol = args.tol if args.tol is not None else 1e-10
    report = check_splitting_exact(fb, tol=tol).merged_with(
        check_splitting_grid(fb, grid_n=args.grid, tol=grid_tol))
    _emit(_stamp(io.splitting_report_to_doc(report), args), args)
    return 0 if (report.exact_pass and report.grid_pass) else 1


def _cmd_complete_filters(args) -> int:
    if args.haar is not None:
        matrix = _parse_matrix(args.haar)
        unitary = None
        if args.seed is not None:
            rng = np.random.default_rng(args.seed)
            unitary = random_unitary(matrix.det_abs * args.L, rng)
        fb = complete_bank_haar(matrix, L=args.L, unitary=unitary)
        _emit(_stamp(io.filterbank_to_doc(fb), args), args)
        return 0
    if args.bank is None:
        raise _UsageError("give a low-pass bank file or --haar MATRIX")
    fb = _load_bank(args.bank)
    sampled = complete_bank_grid(fb, grid_n=args.grid)
    _emit(_stamp(io.sampled_bank_to_doc(sampled), args), args)
    return 0


def _cmd_decompose(args) -> int:
    fb = _load_bank(args.bank)
    grid = io.grid_from_doc(io.read_doc(args.data, io.GRID_SCHEMA))
    tree = run_decompose(grid, fb, args.depth, force=args.force)
    _emit(_stamp(io.tree_to_doc(tree), args), args)
    return 0


def _cmd_reconstruct(args) -> int:
    fb = _load_bank(args.bank)
    tree = io.tree_from_doc(io.read_doc(args.tree, io.TREE_SCHEMA), fb)
    if args.basis:
        spec = io.basis_from_doc(io.read_doc(args.basis, io.BASIS_SCHEMA))
    else:
        spec = level_basis(tree.a, tree.depth, tree.depth)
    grid = run_reconstruct(tree, spec, force=args.force)
    _emit(_stamp(io.grid_to_doc(grid), args), args)
    return 0


def _cmd_partition_check(args) -> int:
    spec = io.basis_from_doc(io.read_doc(args.basis, io.BASIS_SCHEMA))
    report = check_partition(spec)
    _emit(_stamp(io.partition_report_to_doc(report), args), args)
    return 0 if report.admissible else 1


def _cmd_best_basis(args) -> int:
    fb = _load_bank(args.bank)
    doc = io.read_doc(args.data)
    schema = doc.get("schema")
    if schema == io.TREE_SCHEMA:
        tree = io.tree_from_doc(doc, fb)
        tree.ensure_complete()
    elif schema == io.GRID_SCHEMA:
        if args.depth is None:
            raise _UsageError("--depth is required when the input is a grid")
        grid = io.grid_from_doc(doc)
        tree = run_decompose(grid, fb, args.depth, force=args.force)
    else:
        raise FormatError(f"expected a grid or tree document, got schema {schema!r}")
    cost = _parse_cost(args.cost)
    spec = select_best_basis(tree, cost)
    costs = node_costs(tree, cost)
    out = io.basis_to_doc(spec)
    out["cost"] = args.cost
    # spec node (n, j) sits at tree depth J - j
    out["total_cost"] = io.format_float(
        sum(costs[(n, spec.J - j)] for n, j in spec.nodes))
    out["node_costs"] = [[n, dep, io.format_float(costs[(n, dep)])]
                         for (n, dep) in sorted(costs)]
    _emit(_stamp(out, args), args)
    return 0


def _cmd_frame_bounds(args) -> int:
    from .frames import frame_bounds
    if args.c1 <= 0 or args.c1 > args.c2:
        raise _UsageError(f"need 0 < C1 <= C2, got C1={args.c1}, C2={args.c2}")
    fb = _load_bank(args.bank)
    report = frame_bounds(fb, grid_n=args.grid, c1=args.c1, c2=args.c2,
                          levels=args.levels)
    _emit(_stamp(io.frame_report_to_doc(report), args), args)
    return 0


def _cmd_symbol(args) -> int:
    if args.n < 0:
        raise _UsageError(f"packet index must be >= 0, got {args.n}")
    fb = _load_bank(args.bank)
    xis = [_parse_xi(t, fb.dim) for t in args.xi] or [np.zeros(fb.dim)]
    points = []
    for xi in xis:
        sym = packet_symbol(fb, args.n, xi)
        rows = [[{"re": io.format_float(z.real), "im": io.format_float(z.imag)}
                 for z in row] for row in np.atleast_2d(sym.values)]
        points.append({"xi": [io.format_float(x) for x in xi], "matrix": rows})
    doc = {"schema": "packetlab-symbol-v1", "n": args.n, "L": fb.L,
           "points": points}
    _emit(_stamp(doc, args), args)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="packetlab",
        description="Packet transforms for integer dilation matrices.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out=True, seed=True):
        if out:
            p.add_argument("--out", help="write the JSON report here instead of stdout")
        if seed:
            p.add_argument("--seed", type=int, help="seed for randomized steps; recorded in the output")

    p = sub.add_parser("digits", help="digit sets of A and B = A^t")
    p.add_argument("matrix", help="integer rows as JSON, e.g. [[1,1],[1,-1]]")
    common(p)
    p.set_defaults(func=_cmd_digits)

    p = sub.add_parser("check-filters", help="exact and grid splitting checks")
    p.add_argument("bank")
    p.add_argument("--grid", type=int, default=None, metavar="N")
    p.add_argument("--tol", type=float, default=None, metavar="X")
    common(p)
    p.set_defaults(func=_cmd_check_filters)

    p = sub.add_parser("complete-filters",
                       help="orthonormal completion: --haar for a one-tap-per-digit bank, "
                            "or a low-pass bank file for a pointwise grid completion")
    p.add_argument("bank", nargs="?")
    p.add_argument("--haar", metavar="MATRIX", help="build the single-tap bank for this matrix")
    p.add_argument("-L", type=int, default=1, help="multiplicity for --haar")
    p.add_argument("--grid", type=int, default=None, metavar="N")
    common(p)
    p.set_defaults(func=_cmd_complete_filters)

    p = sub.add_parser("decompose", help="full packet tree of a coefficient grid")
    p.add_argument("data")
    p.add_argument("bank")
    p.add_argument("--depth", type=int, required=True, metavar="D")
    p.add_argument("--force", action="store_true",
                   help="proceed even if the bank fails the orthonormality check")
    common(p)
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("reconstruct", help="rebuild the root grid from a packet tree")
    p.add_argument("tree")
    p.add_argument("bank")
    p.add_argument("--basis", help="basis JSON; default: all deepest leaves")
    p.add_argument("--force", action="store_true")
    common(p)
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("partition-check", help="does the node set tile [0, a^J)?")
    p.add_argument("basis")
    common(p)
    p.set_defaults(func=_cmd_partition_check)

    p = sub.add_parser("best-basis", help="minimal-cost admissible basis of a tree")
    p.add_argument("data", help="grid or tree JSON")
    p.add_argument("bank")
    p.add_argument("--depth", type=int, default=None, metavar="D",
                   help="decomposition depth when the input is a grid")
    p.add_argument("--cost", default="entropy", metavar="C",
                   help="entropy, l1, lp:P, or threshold:T")
    p.add_argument("--force", action="store_true")
    common(p)
    p.set_defaults(func=_cmd_best_basis)

    p = sub.add_parser("frame-bounds", help="grid-certified frame bound report")
    p.add_argument("bank")
    p.add_argument("--grid", type=int, default=None, metavar="N")
    p.add_argument("--c1", type=float, default=1.0, metavar="C1")
    p.add_argument("--c2", type=float, default=1.0, metavar="C2")
    p.add_argument("--levels", type=int, default=3, metavar="J")
    common(p)
    p.set_defaults(func=_cmd_frame_bounds)

    p = sub.add_parser("symbol", help="packet symbol product at given frequencies")
    p.add_argument("bank")
    p.add_argument("-n", type=int, required=True, help="packet index")
    p.add_argument("--xi", action="append", default=[], metavar="X0,X1,...",
                   help="frequency vector; repeatable (default: the origin)")
    common(p)
    p.set_defaults(func=_cmd_symbol)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PacketLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
