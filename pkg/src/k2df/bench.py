"""Random-matrix multiplication benchmark: space and time per representation."""

from __future__ import annotations

import time
from dataclasses import dataclass

from .boolmul import DEFAULT_LEAF_SIDE, multiply
from .matrix import random_matrix
from .reps import NAMES, build

COLUMNS = ("rep", "density", "avg_bpn", "avg_sec")


@dataclass
class BenchRow:
    rep: str
    size: int
    density: float
    avg_bpn: float
    avg_sec: float
    matrices: int
    products: int


def bench_cell(n: int, density: float, seeds: int, reps=NAMES, leaf_side: int = DEFAULT_LEAF_SIDE,
               first_seed: int = 1) -> list[BenchRow]:
    """Build ``seeds`` random matrices; multiply them in disjoint consecutive pairs.

    With a single seed the matrix is squared.  Timing covers the multiply call only.
    """
    mats = [random_matrix(n, density, first_seed + s) for s in range(seeds)]
    pairs = [(i, i + 1) for i in range(0, seeds - 1, 2)] or [(0, 0)]
    rows = []
    for rep in reps:
        trees = [build(rep, m) for m in mats]
        bpn = sum(t.bpn() for t in trees) / len(trees)
        secs = []
        for i, j in pairs:
            t0 = time.perf_counter()
            multiply(trees[i], trees[j], leaf_side=leaf_side)
            secs.append(time.perf_counter() - t0)
        rows.append(BenchRow(rep, n, density, bpn, sum(secs) / len(secs), len(trees), len(secs)))
    return rows


def run_bench(sizes, densities, seeds: int, reps=NAMES, leaf_side: int = DEFAULT_LEAF_SIDE,
              progress=None) -> list[BenchRow]:
    out = []
    for n in sizes:
        for d in densities:
            cell = bench_cell(n, d, seeds, reps, leaf_side)
            out.extend(cell)
            if progress:
                for r in cell:
                    progress(r)
    return out
