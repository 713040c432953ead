"""Sparse binary matrices: coordinate model, edge-list I/O, random generation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, TextIO

import numpy as np

from .errors import ParseError


@dataclass(frozen=True)
class PaddedShape:
    k: int
    h: int
    side: int


def pad_shape(n: int, k: int) -> PaddedShape:
    """Smallest power of ``k`` that is at least ``n``."""
    if k < 2:
        raise ValueError(f"arity k must be >= 2, got {k}")
    if n < 1:
        raise ValueError(f"matrix side must be >= 1, got {n}")
    h, side = 0, 1
    while side < n:
        side *= k
        h += 1
    return PaddedShape(k, h, side)


class CoordMatrix:
    """Square 0/1 matrix stored as row-major sorted, deduplicated coordinates."""

    __slots__ = ("n", "rows", "cols")

    def __init__(self, n: int, rows=(), cols=(), *, presorted: bool = False):
        if n < 1:
            raise ValueError(f"matrix side must be >= 1, got {n}")
        r = np.asarray(rows, dtype=np.int64).ravel()
        c = np.asarray(cols, dtype=np.int64).ravel()
        if r.shape != c.shape:
            raise ValueError("row and column arrays differ in length")
        if r.size and (r.min() < 0 or c.min() < 0 or r.max() >= n or c.max() >= n):
            raise ValueError(f"coordinate outside [0, {n})")
        if not presorted and r.size:
            key = np.unique(r * n + c)
            r, c = key // n, key % n
        self.n = int(n)
        self.rows = r
        self.cols = c

    @classmethod
    def from_coords(cls, n: int, coords: Iterable[tuple[int, int]]) -> "CoordMatrix":
        pairs = list(coords)
        if not pairs:
            return cls(n)
        r, c = zip(*pairs)
        return cls(n, r, c)

    @classmethod
    def from_dense(cls, dense) -> "CoordMatrix":
        a = np.asarray(dense, dtype=bool)
        r, c = np.nonzero(a)
        return cls(a.shape[0], r, c, presorted=True)

    @property
    def nnz(self) -> int:
        return int(self.rows.size)

    @property
    def coords(self) -> list[tuple[int, int]]:
        return list(zip(self.rows.tolist(), self.cols.tolist()))

    @property
    def density(self) -> float:
        return self.nnz / (self.n * self.n)

    def __eq__(self, other):
        if not isinstance(other, CoordMatrix):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
        )

    def __repr__(self):
        return f"CoordMatrix(n={self.n}, nnz={self.nnz})"

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=bool)
        a[self.rows, self.cols] = True
        return a


def load_edgelist(stream: TextIO) -> CoordMatrix:
    """Read ``n nnz`` followed by ``row col`` lines (0-based).

    MatrixMarket ``coordinate pattern`` files are also accepted: ``%`` lines
    are skipped and indices are converted from 1-based.
    """
    lines = iter(enumerate(stream, start=1))
    market = False
    header = None
    for lineno, line in lines:
        s = line.strip()
        if lineno == 1 and s.startswith("%%MatrixMarket"):
            market = True
            if "pattern" not in s.lower() or "coordinate" not in s.lower():
                raise ParseError("only 'coordinate pattern' MatrixMarket files are supported", lineno)
            continue
        if not s or s.startswith("%"):
            continue
        header = (lineno, s.split())
        break
    if header is None:
        raise ParseError("missing header line")
    lineno, fields = header
    try:
        nums = [int(x) for x in fields]
    except ValueError:
        raise ParseError(f"malformed header {' '.join(fields)!r}", lineno) from None
    if market:
        if len(nums) != 3:
            raise ParseError("MatrixMarket size line needs 'rows cols nnz'", lineno)
        if nums[0] != nums[1]:
            raise ParseError("only square matrices are supported", lineno)
        n, declared = nums[0], nums[2]
    else:
        if len(nums) != 2:
            raise ParseError("header must be 'n nnz'", lineno)
        n, declared = nums
    if n < 1 or declared < 0:
        raise ParseError(f"bad header values n={n} nnz={declared}", lineno)
    base = 1 if market else 0
    rows: list[int] = []
    cols: list[int] = []
    for lineno, line in lines:
        s = line.strip()
        if not s or (market and s.startswith("%")):
            continue
        parts = s.split()
        if len(parts) != 2:
            raise ParseError(f"expected 'row col', got {s!r}", lineno)
        try:
            r, c = int(parts[0]) - base, int(parts[1]) - base
        except ValueError:
            raise ParseError(f"non-integer coordinate in {s!r}", lineno) from None
        if not (0 <= r < n and 0 <= c < n):
            raise ParseError(f"coordinate ({parts[0]}, {parts[1]}) outside the {n}x{n} matrix", lineno)
        rows.append(r)
        cols.append(c)
    if len(rows) != declared:
        raise ParseError(f"header declares {declared} entries, found {len(rows)}")
    return CoordMatrix(n, rows, cols)


def dump_edgelist(m: CoordMatrix, stream: TextIO) -> None:
    stream.write(f"{m.n} {m.nnz}\n")
    for r, c in zip(m.rows.tolist(), m.cols.tolist()):
        stream.write(f"{r} {c}\n")


def random_matrix(n: int, density: float, seed: int) -> CoordMatrix:
    """Exactly ``round(density * n**2)`` distinct cells, uniformly at random."""
    if not 0.0 <= density <= 1.0:
        raise ValueError(f"density must be in [0, 1], got {density}")
    total = n * n
    m = int(round(density * total))
    rng = np.random.default_rng(seed)
    complement = m > total // 2
    want = total - m if complement else m
    picked = np.empty(0, dtype=np.int64)
    while picked.size < want:
        need = want - picked.size
        draw = rng.integers(0, total, size=need + need // 8 + 16, dtype=np.int64)
        merged = np.concatenate([picked, draw])
        _, first = np.unique(merged, return_index=True)
        picked = merged[np.sort(first)][:want]
    if complement:
        mask = np.ones(total, dtype=bool)
        mask[picked] = False
        cells = np.flatnonzero(mask)
    else:
        cells = np.sort(picked)
    return CoordMatrix(n, cells // n, cells % n, presorted=True)


class DenseOracle:
    """Brute-force n x n boolean grid used to check every tree operation."""

    __slots__ = ("n", "bits")

    def __init__(self, bits):
        self.bits = np.asarray(bits, dtype=bool)
        self.n = self.bits.shape[0]

    @classmethod
    def from_matrix(cls, m: CoordMatrix) -> "DenseOracle":
        return cls(m.to_dense())

    def __getitem__(self, rc) -> int:
        r, c = rc
        return int(self.bits[r, c])

    def row(self, r: int) -> list[int]:
        return np.flatnonzero(self.bits[r]).tolist()

    def multiply(self, other: "DenseOracle") -> "DenseOracle":
        # integer matmul, then threshold: the O(n^3) definition
        prod = self.bits.astype(np.int64) @ other.bits.astype(np.int64)
        return DenseOracle(prod > 0)

    def union(self, other: "DenseOracle") -> "DenseOracle":
        return DenseOracle(self.bits | other.bits)

    def to_matrix(self) -> CoordMatrix:
        return CoordMatrix.from_dense(self.bits)
