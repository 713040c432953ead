"""Balanced-parenthesis representation: B holds the tree shape in DFS order,
L2 holds the last-level k^2-bit blocks in the same order.

A level h-1 node with children is written ``(())`` and its block goes to L2;
every zero leaf is ``()``.  The i-th ``(())`` in B owns the i-th block of L2.
"""

from __future__ import annotations

import numpy as np

from .base import HEADER_SIZE, BlockTable, K2Tree, bitseq_from_blocks, parse_header
from .bitseq import BitSeq
from .errors import CorruptionError, StructureError
from .matrix import CoordMatrix
from .parens import ParenSeq, PatternIndex


def bp_bits(table: BlockTable) -> np.ndarray:
    """Parenthesis bits (1 = open) for the tree in ``table``."""
    kk, h = table.kk, table.h
    pre, dep, bits = table.prefix, table.depth.astype(np.int64), table.bits
    upper = dep < h - 1
    # zero-leaf children of upper internal nodes
    flags = ((bits[upper][:, None] >> np.arange(kk, dtype=np.uint64)) & np.uint64(1)) == 0
    z_pre = (pre[upper][:, None] * kk + np.arange(kk)[None, :])[flags]
    z_dep = np.broadcast_to(dep[upper][:, None] + 1, flags.shape)[flags]
    # level h-1 nodes get one placeholder child so they print as (())
    f_pre = pre[~upper] * kk
    f_dep = dep[~upper] + 1
    all_pre = np.concatenate([pre, z_pre, f_pre])
    all_dep = np.concatenate([dep, z_dep, f_dep])
    scale = np.array([kk ** (h - d) for d in range(h + 1)], dtype=np.int64)
    padded = all_pre * scale[all_dep]
    order = np.lexsort((all_dep, padded))
    d = all_dep[order]
    closes_before = np.empty(d.size, dtype=np.int64)
    closes_before[0] = 0
    closes_before[1:] = d[:-1] - d[1:] + 1
    opens = np.cumsum(closes_before + 1) - 1
    out = np.zeros(2 * d.size, dtype=np.uint8)
    out[opens] = 1
    return out


class BpTree(K2Tree):
    TAG = 0x04
    name = "bp"

    def __init__(self, k: int, n: int, h: int, B: ParenSeq, L2: BitSeq):
        kk = k * k
        if len(L2) % kk:
            raise CorruptionError("L2 must consist of whole k^2-bit blocks")
        self.k, self.n, self.h = k, n, h
        self.B = B
        self.L2 = L2
        self.pat = PatternIndex(B)
        self.leafBlocks = len(L2) // kk
        self.t = len(B) // 2 - self.pat.count
        self._check_patterns()

    def _check_patterns(self):
        if self.pat.count != self.leafBlocks:
            raise CorruptionError(
                f"B has {self.pat.count} (()) occurrences but L2 holds {self.leafBlocks} blocks"
            )

    @classmethod
    def from_table(cls, table: BlockTable) -> "BpTree":
        B = ParenSeq(BitSeq.from_bits(bp_bits(table)), check=False)
        leaf = table.depth == table.h - 1
        t = cls(table.k, table.n, table.h, B, bitseq_from_blocks(table.bits[leaf], table.kk))
        assert len(B) == 2 * t.t + 2 * t.leafBlocks
        return t

    # -- leaf access ------------------------------------------------------------
    def leaf_offset(self, pos: int) -> int:
        """L2 block index of the first level h-1 node at or after ``pos``."""
        return self.pat.rank(pos)

    def leaf_block_of(self, pos: int) -> int:
        if not (0 <= pos < len(self.B)) or not self.pat.is_start(pos):
            raise StructureError(f"no (()) starts at position {pos}")
        idx = self.pat.rank(pos)
        kk = self.kk
        return self.L2.get_bits(idx * kk, kk)

    # -- navigation -------------------------------------------------------------
    # cursor = (position in B, leaf offset correction); the correction is 0 in BP
    def root(self):
        return None if self.L2.count_ones() == 0 else (0, 0)

    def _enter(self, q: int, depth: int, delta: int):
        return (q, delta)

    def children(self, cur, depth):
        pos, delta = cur
        B = self.B
        out = [None] * self.kk
        q = pos + 1
        for i in range(self.kk):
            if B.is_open(q + 1):
                out[i] = self._enter(q, depth + 1, delta)
                q = B.find_close(q) + 1
            else:
                q += 2
        return out

    def child(self, cur, depth, i):
        pos, delta = cur
        B = self.B
        q = pos + 1
        for _ in range(i):
            q = B.find_close(q) + 1 if B.is_open(q + 1) else q + 2
        if not B.is_open(q + 1):
            return None
        return self._enter(q, depth + 1, delta)

    def leaf_bits(self, cur) -> int:
        pos, delta = cur
        idx = self.leaf_offset(pos) + delta
        kk = self.kk
        return self.L2.get_bits(idx * kk, kk)

    # -- sequential decode --------------------------------------------------------
    def _pointer_target(self, pos: int, depth: int):
        return None

    def table(self) -> BlockTable:
        B = self.B
        L2 = self.L2
        k, kk, last = self.k, self.kk, self.h - 1
        out: list = []
        lc = [0]
        nleaf = self.leafBlocks
        is_open = B.is_open

        def visit(pos, depth, prefix, expanding):
            # node starting at pos; returns position after it
            if depth == last:
                if lc[0] >= nleaf:
                    raise CorruptionError(f"leaf cursor overran L2 at position {pos}")
                out.append((prefix, depth, L2.get_bits(lc[0] * kk, kk)))
                lc[0] += 1
                return pos + 4
            tgt = self._pointer_target(pos, depth)
            if tgt is not None:
                before = lc[0]
                self._check_leaf_cursor(pos, before, expanding)
                visit(tgt, depth, prefix, True)
                if not expanding:
                    self._check_pointer_leaves(pos, lc[0] - before)
                return pos + 4
            slot = len(out)
            out.append(None)
            bits = 0
            q = pos + 1
            for j in range(kk):
                if is_open(q + 1):
                    bits |= 1 << j
                    q = visit(q, depth + 1, prefix * kk + j, expanding)
                else:
                    q += 2
            if is_open(q):
                raise CorruptionError(f"node at {pos} has more than {kk} children")
            out[slot] = (prefix, depth, bits)
            return q + 1

        end = visit(0, 0, 0, False)
        if end != len(B):
            raise CorruptionError("B holds more than one tree")
        if lc[0] != self.leafBlocks:
            raise CorruptionError(f"decode consumed {lc[0]} of {self.leafBlocks} L2 blocks")
        pre, dep, bits = zip(*out)
        return BlockTable(
            k,
            self.n,
            self.h,
            np.asarray(pre, dtype=np.int64),
            np.asarray(dep, dtype=np.int8),
            np.asarray(bits, dtype=np.uint64),
        )

    def _check_leaf_cursor(self, pos, lc, expanding):
        pass

    def _check_pointer_leaves(self, pos, used):
        pass

    def decode(self) -> CoordMatrix:
        return self.table().to_matrix()

    def subtree_rows(self, cur, depth):
        side = self.k ** (self.h - depth)
        rows = [0] * side
        if cur is None:
            return rows
        k, kk, last = self.k, self.kk, self.h - 1
        is_open = self.B.is_open
        L2 = self.L2

        def visit(pos, depth, r0, c0, sub, delta):
            if depth == last:
                blk = L2.get_bits((self.leaf_offset(pos) + delta) * kk, kk)
                while blk:
                    low = blk & -blk
                    j = low.bit_length() - 1
                    rows[r0 + j // k] |= 1 << (c0 + j % k)
                    blk ^= low
                return pos + 4
            tgt = self._pointer_target(pos, depth)
            if tgt is not None:
                nd = delta + self.leaf_offset(pos) - self.leaf_offset(tgt)
                visit(tgt, depth, r0, c0, sub, nd)
                return pos + 4
            sub //= k
            q = pos + 1
            for j in range(kk):
                if is_open(q + 1):
                    q = visit(q, depth + 1, r0 + (j // k) * sub, c0 + (j % k) * sub, sub, delta)
                else:
                    q += 2
            return q + 1

        pos, delta = cur
        visit(pos, depth, 0, 0, side, delta)
        return rows

    # -- space -------------------------------------------------------------------
    @property
    def nnz(self) -> int:
        return self.L2.count_ones()

    def components(self):
        return {
            "B": len(self.B),
            "L2": len(self.L2),
            "B_index": self.B.overhead_bits,
            "pattern_index": self.pat.overhead_bits,
        }

    def payload(self) -> bytes:
        return self.B.bits.to_bytes() + self.L2.to_bytes()

    @classmethod
    def from_bytes(cls, buf: bytes) -> "BpTree":
        tag, k, n, h, body = parse_header(buf)
        if tag != cls.TAG:
            raise CorruptionError(f"expected representation tag {cls.TAG}, got {tag}")
        Bb, pos = BitSeq.read(body, HEADER_SIZE)
        L2, pos = BitSeq.read(body, pos)
        if pos != len(body):
            raise CorruptionError("trailing bytes after L2")
        try:
            B = ParenSeq(Bb)
        except ValueError as exc:
            raise CorruptionError(str(exc)) from None
        return cls(k, n, max(h, 1), B, L2)


def build_bp(m: CoordMatrix, k: int = 2) -> BpTree:
    return BpTree.from_table(BlockTable.from_matrix(m, k))


def leaf_block_of(t: BpTree, pos: int) -> int:
    return t.leaf_block_of(pos)


def get_cell_bp(t: BpTree, r: int, c: int) -> int:
    return t.get_cell(r, c)


def decode_bp(t: BpTree) -> CoordMatrix:
    return t.decode()
