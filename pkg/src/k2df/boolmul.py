"""Boolean product and union of two k^2-trees by quadrant recursion.

The product is accumulated in place into a tree of nodes: a list of k^2
children above the base level, an int block at level h-1, or a dense
boolean array once a subtree is at most ``leaf_side`` cells wide.  Every
node created belongs to the output unless its subtree turns out empty, so
live nodes never exceed the output size plus the recursion depth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import K2Tree, BuildBuffer, BlockTable
from .errors import DimensionError
from .matrix import CoordMatrix

DEFAULT_LEAF_SIDE = 64


@dataclass
class NodeCounter:
    live: int = 0
    peak: int = 0
    created: int = 0

    def new(self):
        self.live += 1
        self.created += 1
        if self.live > self.peak:
            self.peak = self.live

    def drop(self):
        self.live -= 1


def _check(a: K2Tree, b: K2Tree):
    if type(a) is not type(b):
        raise DimensionError(f"representations differ: {a.name} vs {b.name}")
    if a.k != b.k or a.n != b.n:
        raise DimensionError(f"shapes differ: k={a.k} n={a.n} vs k={b.k} n={b.n}")
    if a.k != 2:
        raise DimensionError("multiplication is defined for k=2 only")


def _check_leaf_side(t: K2Tree, leaf_side: int):
    s = t.k
    while s < leaf_side:
        s *= t.k
    if s != leaf_side or leaf_side > 64:
        raise ValueError(f"leaf_side must be a power of {t.k} between {t.k} and 64")


class _Operand:
    """Memoized navigation over one input tree."""

    def __init__(self, t: K2Tree):
        self.t = t
        self._kids: dict = {}
        self._dense: dict = {}

    def children(self, cur, depth):
        key = (cur, depth)
        ch = self._kids.get(key)
        if ch is None:
            ch = self._kids[key] = self.t.children(cur, depth)
        return ch

    def dense(self, cur, depth) -> np.ndarray:
        key = (cur, depth)
        d = self._dense.get(key)
        if d is None:
            rows = np.asarray(self.t.subtree_rows(cur, depth), dtype=np.uint64)
            side = rows.size
            d = ((rows[:, None] >> np.arange(side, dtype=np.uint64)) & np.uint64(1)).astype(np.float32)
            self._dense[key] = d
        return d


def _block_product(a: int, b: int, k: int) -> int:
    out = 0
    for i in range(k):
        for l in range(k):
            if (a >> (i * k + l)) & 1:
                out |= ((b >> (l * k)) & ((1 << k) - 1)) << (i * k)
    return out


class _Builder:
    def __init__(self, like: K2Tree, leaf_side: int, counter: NodeCounter):
        self.k, self.kk, self.h = like.k, like.kk, like.h
        self.leaf_side = leaf_side
        self.counter = counter

    def dense_depth(self, depth: int) -> bool:
        side = self.k ** (self.h - depth)
        return side <= self.leaf_side and side > self.k

    def mul_into(self, acc, A: _Operand, a, B: _Operand, b, depth):
        """Return ``acc`` OR (subtree a x subtree b), reusing ``acc`` in place."""
        if a is None or b is None:
            return acc
        cnt = self.counter
        if self.dense_depth(depth):
            p = (A.dense(a, depth) @ B.dense(b, depth)) > 0
            if acc is None:
                if not p.any():
                    return None
                cnt.new()
                return p
            acc |= p
            return acc
        if depth == self.h - 1:
            p = _block_product(A.t.leaf_bits(a), B.t.leaf_bits(b), self.k)
            if acc is None:
                if not p:
                    return None
                cnt.new()
                return p
            return acc | p
        k, kk = self.k, self.kk
        ca, cb = A.children(a, depth), B.children(b, depth)
        fresh = acc is None
        node = [None] * kk if fresh else acc
        if fresh:
            cnt.new()
        for i in range(k):
            for j in range(k):
                s = i * k + j
                for l in range(k):
                    x, y = ca[i * k + l], cb[l * k + j]
                    if x is not None and y is not None:
                        node[s] = self.mul_into(node[s], A, x, B, y, depth + 1)
        if fresh and all(c is None for c in node):
            cnt.drop()
            return None
        return node

    def copy_into(self, acc, A: _Operand, a, depth):
        """Return ``acc`` OR subtree a."""
        if a is None:
            return acc
        cnt = self.counter
        if self.dense_depth(depth):
            p = A.dense(a, depth) > 0
            if acc is None:
                cnt.new()
                return p
            acc |= p
            return acc
        if depth == self.h - 1:
            p = A.t.leaf_bits(a)
            if acc is None:
                cnt.new()
                return p
            return acc | p
        ca = A.children(a, depth)
        if acc is None:
            acc = [None] * self.kk
            cnt.new()
        for s, x in enumerate(ca):
            if x is not None:
                acc[s] = self.copy_into(acc[s], A, x, depth + 1)
        return acc

    def emit(self, node, buf: BuildBuffer, prefix=0, depth=0):
        if node is None:
            return
        kk = self.kk
        if isinstance(node, np.ndarray):
            side = node.shape[0]
            r, c = np.nonzero(node)
            local = BlockTable.from_matrix(CoordMatrix(side, r, c, presorted=True), self.k)
            scale = np.array([kk**d for d in range(local.h)], dtype=np.int64)
            d = local.depth.astype(np.int64)
            buf.extend(prefix * scale[d] + local.prefix, d + depth, local.bits)
            return
        if depth == self.h - 1:
            buf.append(prefix, depth, node)
            return
        bits = 0
        for s, ch in enumerate(node):
            if ch is not None:
                bits |= 1 << s
        buf.append(prefix, depth, bits)
        for s, ch in enumerate(node):
            if ch is not None:
                self.emit(ch, buf, prefix * kk + s, depth + 1)


def _finish(like: K2Tree, b: _Builder, node) -> K2Tree:
    buf = BuildBuffer(like.k, like.n, like.h)
    b.emit(node, buf)
    opts = {}
    if like.name == "cbp":
        opts["min_span"] = like.min_span
    return buf.finalize(like.name, **opts)


def multiply(A: K2Tree, B: K2Tree, leaf_side: int = DEFAULT_LEAF_SIDE, counter: NodeCounter | None = None) -> K2Tree:
    """Boolean product A x B in the representation of the inputs.

    ``leaf_side`` is the widest subtree handled as a dense block; pass ``k``
    to recurse all the way down to k x k block products.
    """
    _check(A, B)
    _check_leaf_side(A, leaf_side)
    b = _Builder(A, leaf_side, counter or NodeCounter())
    node = b.mul_into(None, _Operand(A), A.root(), _Operand(B), B.root(), 0)
    return _finish(A, b, node)


def union(A: K2Tree, B: K2Tree, leaf_side: int = DEFAULT_LEAF_SIDE, counter: NodeCounter | None = None) -> K2Tree:
    _check(A, B)
    _check_leaf_side(A, leaf_side)
    b = _Builder(A, leaf_side, counter or NodeCounter())
    node = b.copy_into(None, _Operand(A), A.root(), 0)
    node = b.copy_into(node, _Operand(B), B.root(), 0)
    return _finish(A, b, node)


def square(A: K2Tree, **kw) -> K2Tree:
    return multiply(A, A, **kw)


def oracle_multiply(a: CoordMatrix, b: CoordMatrix) -> CoordMatrix:
    """Dense O(n^3) boolean product."""
    if a.n != b.n:
        raise DimensionError("matrix sides differ")
    p = a.to_dense().astype(np.int64) @ b.to_dense().astype(np.int64)
    return CoordMatrix.from_dense(p > 0)


def oracle_union(a: CoordMatrix, b: CoordMatrix) -> CoordMatrix:
    if a.n != b.n:
        raise DimensionError("matrix sides differ")
    return CoordMatrix.from_dense(a.to_dense() | b.to_dense())
