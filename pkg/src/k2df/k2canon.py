"""Canonical level-order k^2-tree: bit arrays T (upper levels) and L (last level)."""

from __future__ import annotations

import math

import numpy as np

from .base import BlockTable, K2Tree, bitseq_from_blocks, parse_header
from .bitseq import BitSeq, RankIndex
from .errors import CorruptionError, NavigationError
from .matrix import CoordMatrix


class CanonicalTree(K2Tree):
    TAG = 0x01
    name = "canon"

    def __init__(self, k: int, n: int, h: int, T: BitSeq, L: BitSeq):
        kk = k * k
        if len(T) % kk or len(L) % kk:
            raise CorruptionError("T and L must consist of whole k^2-bit blocks")
        self.k, self.n, self.h = k, n, h
        self.T, self.L = T, L
        self.rankT = RankIndex(T)
        if self.rankT.ones + 1 != (len(T) + len(L)) // kk:
            raise CorruptionError(
                f"T has {self.rankT.ones} ones but T.L holds {(len(T) + len(L)) // kk} blocks"
            )
        if (len(L) == 0) != (h >= 2 and len(T) == kk and self.rankT.ones == 0):
            raise CorruptionError("empty L is only valid for an all-zero root with h >= 2")

    @classmethod
    def from_table(cls, table: BlockTable) -> "CanonicalTree":
        t = table.permuted(table.level_order())
        upper = t.depth < t.h - 1
        kk = t.kk
        return cls(
            t.k,
            t.n,
            t.h,
            bitseq_from_blocks(t.bits[upper], kk),
            bitseq_from_blocks(t.bits[~upper], kk),
        )

    # -- navigation -----------------------------------------------------------
    def _bit(self, pos: int) -> int:
        nt = len(self.T)
        return self.T.get(pos) if pos < nt else self.L.get(pos - nt)

    def child_pos(self, x: int, i: int) -> int:
        """Position in T.L of child ``i`` of the node whose bit sits at ``x``."""
        if not 0 <= x < len(self.T):
            raise NavigationError(f"position {x} is not in T")
        if not 0 <= i < self.kk:
            raise IndexError(f"child index {i} out of range")
        if not self.T.get(x):
            raise NavigationError(f"node at {x} is a zero leaf")
        return self.rankT._rank1(x + 1) * self.kk + i

    def root(self):
        nt = len(self.T)
        if nt:
            return 0 if self.T.get_bits(0, self.kk) else None
        return 0 if self.L.get_bits(0, self.kk) else None

    def children(self, cur, depth):
        kk = self.kk
        blk = self.T.get_bits(cur, kk)
        rank = self.rankT._rank1
        out = [None] * kk
        for i in range(kk):
            if (blk >> i) & 1:
                out[i] = rank(cur + i + 1) * kk
        return out

    def child(self, cur, depth, i):
        if not self.T.get(cur + i):
            return None
        return self.rankT._rank1(cur + i + 1) * self.kk

    def leaf_bits(self, cur) -> int:
        return self.L.get_bits(cur - len(self.T), self.kk)

    # -- decode ---------------------------------------------------------------
    def table(self) -> BlockTable:
        kk = self.kk
        nblocks = (len(self.T) + len(self.L)) // kk
        ones = np.flatnonzero(self.T.to_numpy())
        parent = (ones // kk).tolist()
        digit = (ones % kk).tolist()
        prefix = [0] * nblocks
        depth = [0] * nblocks
        for j in range(1, nblocks):
            p = parent[j - 1]
            prefix[j] = prefix[p] * kk + digit[j - 1]
            depth[j] = depth[p] + 1
        ntb = len(self.T) // kk
        if nblocks > ntb and (min(depth[ntb:]) != self.h - 1 or (ntb and max(depth[:ntb]) >= self.h - 1)):
            raise CorruptionError("T/L split does not match the tree height")
        allbits = np.concatenate([self.T.to_numpy(), self.L.to_numpy()]).reshape(-1, kk).astype(np.uint64)
        blocks = (allbits << np.arange(kk, dtype=np.uint64)).sum(axis=1)
        t = BlockTable(
            self.k,
            self.n,
            self.h,
            np.asarray(prefix, dtype=np.int64),
            np.asarray(depth, dtype=np.int8),
            blocks.astype(np.uint64),
        )
        return t.permuted(np.lexsort((t.depth, t.padded_keys())))

    def decode(self) -> CoordMatrix:
        return self.table().to_matrix()

    # -- space ------------------------------------------------------------------
    @property
    def nnz(self) -> int:
        return self.L.count_ones()

    def components(self):
        return {"T": len(self.T), "L": len(self.L), "rank_T": self.rankT.overhead_bits}

    def payload(self) -> bytes:
        return self.T.to_bytes() + self.L.to_bytes()

    @classmethod
    def from_bytes(cls, buf: bytes) -> "CanonicalTree":
        tag, k, n, h, body = parse_header(buf)
        if tag != cls.TAG:
            raise CorruptionError(f"expected representation tag {cls.TAG}, got {tag}")
        from .base import HEADER_SIZE

        T, pos = BitSeq.read(body, HEADER_SIZE)
        L, pos = BitSeq.read(body, pos)
        if pos != len(body):
            raise CorruptionError("trailing bytes after L")
        return cls(k, n, max(h, 1), T, L)


def build_canonical(m: CoordMatrix, k: int = 2) -> CanonicalTree:
    return CanonicalTree.from_table(BlockTable.from_matrix(m, k))


def child_pos(t: CanonicalTree, x: int, i: int) -> int:
    return t.child_pos(x, i)


def get_cell(t: CanonicalTree, r: int, c: int) -> int:
    return t.get_cell(r, c)


def row_successors(t: CanonicalTree, r: int) -> list[int]:
    return t.row_successors(r)


def decode_canonical(t: CanonicalTree) -> CoordMatrix:
    return t.decode()


BOUND_CONSTANT = 8


def space_bound(k: int, side: int, m: int) -> float:
    kk = k * k
    return kk * m * (math.log(side * side / m, kk) + BOUND_CONSTANT)


def space_bound_check(t: CanonicalTree, m: CoordMatrix) -> int:
    """Return |T|+|L|, asserting it respects the k^2 m (log_{k^2}(n^2/m) + C) bound."""
    if m.nnz < 1:
        raise ValueError("the bound needs at least one nonzero")
    bits = len(t.T) + len(t.L)
    bound = space_bound(t.k, t.side, m.nnz)
    assert bits <= bound, f"{bits} bits exceed the bound {bound:.1f}"
    return bits
