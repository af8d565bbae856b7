"""Command line front end (``slitkit`` / ``python -m slitkit``)."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from .cells import (
    BudgetExceeded,
    CellSet,
    ModuliIndex,
    cache_path,
    enumerate_nondegenerate,
    load_or_enumerate,
    read_cells,
    write_cells,
)
from .homology import (
    HomologyTable,
    Ring,
    UnsupportedOrientation,
    check_orientation,
    column_concentration,
    column_widths,
    homology_groups,
)

log = logging.getLogger("slitkit")

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3
DEFAULT_CLI_MAX_H = 4


class Context:
    """Shared options: budget, worker count, cache policy."""

    def __init__(self, args):
        self.max_h = args.max_h
        self.workers = max(1, args.threads)
        self.use_cache = not args.no_cache

    def cells(self, index: ModuliIndex, write: bool = True) -> CellSet:
        return load_or_enumerate(
            index, max_h=self.max_h, workers=self.workers, use_cache=self.use_cache, write=write
        )


def _index(args) -> ModuliIndex:
    return ModuliIndex(args.g, args.n, args.m)


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def format_table(table: HomologyTable) -> str:
    lines = [f"{table.index}  h={table.index.h}  coefficients {table.ring.tag}"]
    lines.append(f"  {'k':>2}  {'H_k':<24}cells in degree 3h-k")
    top = table.index.dimension
    for g in table.groups:
        text = str(g) if not table.ring.is_field else (str(g.betti) if g.betti else "0")
        lines.append(f"  {g.degree:>2}  {text:<24}{table.cells_per_degree[top - g.degree]}")
    return "\n".join(lines)


# -- subcommands ------------------------------------------------------------------------------

def cmd_enumerate(args, ctx: Context) -> int:
    index = _index(args)
    cs = ctx.cells(index)
    if args.out:
        write_cells(cs, Path(args.out))
    counts = cs.counts_per_degree()
    if args.json:
        _emit({
            "g": index.g, "n": index.n, "m": index.m, "h": index.h,
            "cells": len(cs),
            "cells_per_degree": counts,
            "bidegrees": [
                {"q": q, "p": list(p), "count": k}
                for (q, p), k in sorted(cs.bidegree_counts().items())
            ],
        })
    else:
        print(f"{index}  h={index.h}  {len(cs)} non-degenerate cells")
        for d, k in enumerate(counts):
            if k:
                print(f"  degree {d:>2}: {k}")
    return EXIT_OK


def cmd_homology(args, ctx: Context) -> int:
    index = _index(args)
    ring = Ring.parse(args.coeff)
    check_orientation(index, ring)
    table = homology_groups(index, ring, cells=ctx.cells(index))
    if args.json:
        _emit(table.to_dict())
    else:
        print(format_table(table))
    return EXIT_OK


def cmd_verify(args, ctx: Context) -> int:
    from .fixtures import ALL_TABLES

    if args.suite != "paper-tables":
        print(f"unknown suite {args.suite!r}", file=sys.stderr)
        return EXIT_USAGE
    fresh: dict[ModuliIndex, CellSet] = {}
    failures = 0
    results = []

    def cells_for(index):
        path = cache_path(index)
        if ctx.use_cache and path.exists():
            return read_cells(path)
        if index not in fresh:
            fresh[index] = enumerate_nondegenerate(index, max_h=ctx.max_h, workers=ctx.workers)
        return fresh[index]

    for fx in ALL_TABLES:
        idx = fx.index
        if idx.h > ctx.max_h:
            results.append({"table": fx.tag, "index": str(idx), "coefficients": fx.ring.tag,
                            "status": "skipped", "reason": f"h={idx.h} > max_h={ctx.max_h}"})
            continue
        cells = cells_for(idx)
        if not fx.ring.is_field and idx.m >= 2:
            # constant integral coefficients are not the right local system here;
            # check the mod-2 reduction of the printed groups instead
            table = homology_groups(idx, Ring(2), cells=cells)
            want = fx.reduced_mod(2)
            got = tuple(table.ranks())
            problems = [] if want == got else [f"mod-2 dims expected {list(want)}, computed {list(got)}"]
            mode = "mod-2 reduction"
        else:
            table = homology_groups(idx, fx.ring, cells=cells)
            problems = fx.compare(table)
            mode = "exact"
        status = "pass" if not problems else "FAIL"
        failures += bool(problems)
        results.append({"table": fx.tag, "index": str(idx), "coefficients": fx.ring.tag,
                        "status": status, "mode": mode, "problems": problems})
    if failures == 0 and ctx.use_cache:
        for cs in fresh.values():
            write_cells(cs, cache_path(cs.index))
    if args.json:
        _emit({"suite": args.suite, "max_h": ctx.max_h, "failures": failures, "results": results})
    else:
        for r in results:
            tail = r.get("reason") or r.get("mode")
            print(f"{r['status']:<7} {r['table']:<9} {r['index']:<12} {r['coefficients']:<3} {tail}")
            for p in r.get("problems", []):
                print(f"          {p}")
        print(f"{failures} mismatch(es)")
    return EXIT_MISMATCH if failures else EXIT_OK


def cmd_product(args, ctx: Context) -> int:
    from . import classes

    left = classes.Cochain.from_json(Path(args.left).read_text())
    right = classes.Cochain.from_json(Path(args.right).read_text())
    if args.coeff:
        ring = Ring.parse(args.coeff)
        if ring.is_field:
            left, right = left.reduce(ring.characteristic), right.reduce(ring.characteristic)
        elif left.modulus or right.modulus:
            print("cannot lift mod-p cochains to integers", file=sys.stderr)
            return EXIT_USAGE
    target = ModuliIndex(left.index.g + right.index.g, 1, left.index.m + right.index.m)
    for idx in (left.index, right.index, target):
        if idx.h > ctx.max_h:
            raise BudgetExceeded(idx.h, ctx.max_h)
        check_orientation(idx, Ring(left.modulus))
    cx = classes.assemble_cochain_complex(ctx.cells(target))
    try:
        prod = classes.stack_product(left, right, target=cx)
    except classes.NotACocycle as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = prod.to_dict()
    out["cocycle"] = classes.is_cocycle(prod, cx)
    if prod.modulus:
        out["nonzero_class"] = classes.is_nonzero_class(prod, cx)
    else:
        order = classes.class_order(prod, cx)
        out["class_order"] = "infinity" if order == float("inf") else int(order)
    out["experimental"] = False
    _emit(out)
    return EXIT_OK


def cmd_columns(args, ctx: Context) -> int:
    index = ModuliIndex(args.g, 1, args.m)
    cs = ctx.cells(index)
    reports = [column_concentration(cs, p) for p in column_widths(cs)]
    ok = all(r.concentrated for r in reports)
    if args.json:
        _emit({"g": index.g, "n": 1, "m": index.m, "h": index.h, "concentrated": ok,
               "columns": [r.to_dict() for r in reports]})
    else:
        print(f"{index}  h={index.h}  columns concentrated in q=h: {'yes' if ok else 'NO'}")
        for r in reports:
            nz = ", ".join(f"q={g.degree}: {g}" for g in r.homology if not g.is_zero) or "0"
            print(f"  p={r.p:>2}  cells/q {list(r.cells_per_q)}  homology {nz}")
    return EXIT_OK if ok else EXIT_MISMATCH


# -- parser -----------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1, help="worker processes for enumeration")
    common.add_argument("--max-h", type=int, default=DEFAULT_CLI_MAX_H, help="refuse indices with larger h")
    common.add_argument("--no-cache", action="store_true", help="ignore and do not write the cell cache")
    common.add_argument("--json", action="store_true", help="machine-readable output on stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="slitkit", description="Homology of moduli spaces from slit cells.")
    sub = parser.add_subparsers(dest="command", required=True)

    def index_args(p, with_n=True):
        p.add_argument("--g", type=int, required=True)
        if with_n:
            p.add_argument("--n", type=int, default=1)
        p.add_argument("--m", type=int, default=0)

    p = sub.add_parser("enumerate", parents=[common], help="list non-degenerate cells")
    index_args(p)
    p.add_argument("--out", help="write the cells to FILE")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("homology", parents=[common], help="homology of the moduli space")
    index_args(p)
    p.add_argument("--coeff", default="z", help="z, f2 or f<p>")
    p.set_defaults(func=cmd_homology)

    p = sub.add_parser("verify", parents=[common], help="check against the stored tables")
    p.add_argument("--suite", default="paper-tables")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("product", parents=[common], help="stacking product of two cochains")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--coeff", default=None)
    p.set_defaults(func=cmd_product)

    p = sub.add_parser("columns", parents=[common], help="column complex concentration check")
    index_args(p, with_n=False)
    p.set_defaults(func=cmd_columns)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    ctx = Context(args)
    start = time.perf_counter()
    try:
        code = args.func(args, ctx)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc} (raise --max-h to allow it)", file=sys.stderr)
        return EXIT_BUDGET
    except UnsupportedOrientation as exc:
        print(f"unsupported orientation: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    log.info("%s finished in %.2fs", args.command, time.perf_counter() - start)
    return code
