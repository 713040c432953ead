"""Command-line entry point: ``k2df <command> ...``."""

from __future__ import annotations

import argparse
import csv
import sys
import time
from pathlib import Path

from . import reps
from .bench import COLUMNS, run_bench
from .boolmul import DEFAULT_LEAF_SIDE, multiply, square
from .errors import K2Error
from .k2bp import BpTree
from .k2cbp import DEFAULT_MIN_SPAN, detect_identical
from .matrix import dump_edgelist, load_edgelist, random_matrix


class CliError(Exception):
    pass


def _tau(text: str):
    if text == "auto":
        return None
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("tau must be 'auto' or a non-negative integer") from None
    if v < 0:
        raise argparse.ArgumentTypeError("tau must be non-negative")
    return v


def _csv_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _csv_ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _rep_list(text: str) -> list[str]:
    if text == "all":
        return list(reps.NAMES)
    names = [x for x in text.split(",") if x]
    for x in names:
        if x not in reps.NAMES:
            raise argparse.ArgumentTypeError(f"unknown representation {x!r}")
    return names


def _fmt(x: float) -> str:
    return "inf" if x == float("inf") else f"{x:.6g}"


def _read_matrix(path: str):
    with open(path, encoding="utf-8") as fh:
        return load_edgelist(fh)


def _load(path: str, args=None):
    opts = {}
    if args is not None and getattr(args, "min_span", None) is not None:
        opts["min_span"] = args.min_span
    return reps.load(path, **opts)


def _rep_opts(args) -> dict:
    return {"tau": args.tau, "min_span": args.min_span}


def cmd_build(args, out):
    m = _read_matrix(args.input)
    t = reps.build(args.rep, m, k=args.k, **_rep_opts(args))
    reps.save(t, args.out)
    print(f"bpn={_fmt(t.bpn())}", file=out)


def cmd_convert(args, out):
    src = _load(args.input)
    t = reps.convert(src, args.rep, **_rep_opts(args))
    reps.save(t, args.out)
    print(f"bpn={_fmt(t.bpn())}", file=out)


def cmd_query(args, out):
    t = _load(args.input)
    print(t.get_cell(args.row, args.col), file=out)


def cmd_row(args, out):
    t = _load(args.input)
    print(" ".join(map(str, t.row_successors(args.row))), file=out)


def _timed(fn, *a, **kw):
    t0 = time.perf_counter()
    r = fn(*a, **kw)
    return r, time.perf_counter() - t0


def cmd_multiply(args, out):
    a, b = _load(args.a, args), _load(args.b, args)
    c, sec = _timed(multiply, a, b, leaf_side=args.leaf_side)
    reps.save(c, args.out)
    if args.time:
        print(f"sec={sec:.6f}", file=out)


def cmd_square(args, out):
    a = _load(args.input, args)
    c, sec = _timed(square, a, leaf_side=args.leaf_side)
    reps.save(c, args.out)
    if args.time:
        print(f"sec={sec:.6f}", file=out)


def cmd_randgen(args, out):
    m = random_matrix(args.n, args.density, args.seed)
    if args.out == "-":
        dump_edgelist(m, out)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            dump_edgelist(m, fh)


def cmd_stats(args, out):
    t = _load(args.input)
    print(f"rep={t.name}", file=out)
    print(f"k={t.k}", file=out)
    print(f"n={t.n}", file=out)
    print(f"nnz={t.nnz}", file=out)
    for name, bits in t.components().items():
        print(f"{name}={bits}", file=out)
    print(f"total={t.size_bits()}", file=out)
    print(f"bpn={_fmt(t.bpn())}", file=out)


def cmd_detect(args, out):
    t = _load(args.input)
    bp = t if type(t) is BpTree else BpTree.from_table(t.table())
    for s, r, ln in detect_identical(bp, args.min_span):
        print(f"{s},{r},{ln}", file=out)


def cmd_verify(args, out):
    a, b = _load(args.a).decode(), _load(args.b).decode()
    if a == b:
        print("EQUAL", file=out)
        return 0
    sa, sb = set(a.coords), set(b.coords)
    print(f"DIFFERENT n={a.n}/{b.n} only_a={len(sa - sb)} only_b={len(sb - sa)}", file=out)
    return 1


def cmd_bench(args, out):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(COLUMNS)

    def emit(r):
        w.writerow([r.rep, f"{r.density:g}", f"{r.avg_bpn:.4f}", f"{r.avg_sec:.6f}"])
        out.flush()

    run_bench(args.sizes, args.densities, args.seeds, args.reps, args.leaf_side, progress=emit)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="k2df", description="k^2-tree representations of sparse boolean matrices")
    sub = p.add_subparsers(dest="command", required=True)

    def rep_flags(sp):
        sp.add_argument("--tau", type=_tau, default=None, help="EDF skip threshold (default: auto)")
        sp.add_argument("--min-span", type=int, default=DEFAULT_MIN_SPAN, help="CBP pruning threshold")

    sp = sub.add_parser("build", help="build a representation from an edge list")
    sp.add_argument("--rep", required=True, choices=reps.NAMES)
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--k", type=int, default=2)
    rep_flags(sp)
    sp.set_defaults(fn=cmd_build)

    sp = sub.add_parser("convert", help="re-encode a file in another representation")
    sp.add_argument("--rep", required=True, choices=reps.NAMES)
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--out", required=True)
    rep_flags(sp)
    sp.set_defaults(fn=cmd_convert)

    sp = sub.add_parser("query", help="print one cell (0 or 1)")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--row", type=int, required=True)
    sp.add_argument("--col", type=int, required=True)
    sp.set_defaults(fn=cmd_query)

    sp = sub.add_parser("row", help="print the columns of the ones in a row")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--row", type=int, required=True)
    sp.set_defaults(fn=cmd_row)

    for name, fn in (("multiply", cmd_multiply), ("square", cmd_square)):
        sp = sub.add_parser(name, help=f"boolean {name} of stored matrices")
        if name == "multiply":
            sp.add_argument("--a", required=True)
            sp.add_argument("--b", required=True)
        else:
            sp.add_argument("--in", dest="input", required=True)
        sp.add_argument("--out", required=True)
        sp.add_argument("--time", action="store_true", help="print the multiply wall time")
        sp.add_argument("--leaf-side", type=int, default=DEFAULT_LEAF_SIDE,
                        help="widest subtree multiplied as a dense block (k for pure recursion)")
        sp.add_argument("--min-span", type=int, default=None, help="CBP re-pruning threshold for the result")
        sp.set_defaults(fn=fn)

    sp = sub.add_parser("randgen", help="write a uniform random edge list")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--density", type=float, required=True)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--out", default="-")
    sp.set_defaults(fn=cmd_randgen)

    sp = sub.add_parser("stats", help="component sizes in bits and bits per nonzero")
    sp.add_argument("--in", dest="input", required=True)
    sp.set_defaults(fn=cmd_stats)

    sp = sub.add_parser("detect", help="list maximal repeated subtrees of the BP sequence")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--min-span", type=int, default=DEFAULT_MIN_SPAN)
    sp.set_defaults(fn=cmd_detect)

    sp = sub.add_parser("verify", help="check that two files hold the same matrix")
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    sp.set_defaults(fn=cmd_verify)

    sp = sub.add_parser("bench", help="multiplication benchmark over random matrices (CSV)")
    sp.add_argument("--sizes", type=_csv_ints, default=[1000])
    sp.add_argument("--densities", type=_csv_floats, default=[2e-1, 1e-1, 1e-2, 1e-3, 1e-4])
    sp.add_argument("--seeds", type=int, default=10)
    sp.add_argument("--reps", type=_rep_list, default=list(reps.NAMES))
    sp.add_argument("--leaf-side", type=int, default=DEFAULT_LEAF_SIDE)
    sp.set_defaults(fn=cmd_bench)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        for attr in ("input", "a", "b"):
            path = getattr(args, attr, None)
            if path is not None and not Path(path).is_file():
                raise CliError(f"no such file: {path}")
        rc = args.fn(args, out)
    except (K2Error, ValueError, IndexError, OSError, CliError) as exc:
        print(f"k2df {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return rc or 0


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
