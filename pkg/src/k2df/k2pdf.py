"""Plain depth-first representation: one k^2-bit block per internal node, in
pre-order, in a single bit array P."""

from __future__ import annotations

from .base import HEADER_SIZE, bits_to_blocks, BlockTable, K2Tree, bitseq_from_blocks, parse_header
from .bitseq import BitSeq
from .errors import CorruptionError
from .matrix import CoordMatrix


class DfTree(K2Tree):
    TAG = 0x02
    name = "pdf"

    def __init__(self, k: int, n: int, h: int, P: BitSeq):
        kk = k * k
        if len(P) == 0 or len(P) % kk:
            raise CorruptionError("P must hold a positive number of k^2-bit blocks")
        self.k, self.n, self.h = k, n, h
        self.P = P
        self.m = len(P) // kk
        self._nnz = None
        self._blk = bits_to_blocks(P.to_numpy(), kk).tolist()

    @classmethod
    def from_table(cls, table: BlockTable) -> "DfTree":
        t = cls(table.k, table.n, table.h, bitseq_from_blocks(table.bits, table.kk))
        t._nnz = table.nnz()
        return t

    def block(self, i: int) -> int:
        return self._blk[i]

    def blocks(self) -> list[int]:
        return list(self._blk)

    # -- traversal ------------------------------------------------------------
    def skip_subtree(self, b: int, depth: int) -> int:
        """Index of the first block after the subtree whose root block is ``b``."""
        last = self.h - 1
        m = self.m
        pend: list[int] = []
        d = depth
        i = b
        while True:
            if i >= m:
                raise CorruptionError(f"subtree at block {b} runs past the end of P")
            blk = self.block(i)
            i += 1
            if d < last and blk:
                pend.append(blk.bit_count())
                d += 1
                continue
            while pend:
                pend[-1] -= 1
                if pend[-1]:
                    break
                pend.pop()
                d -= 1
            if not pend:
                return i

    def root(self):
        return 0 if self.block(0) else None

    def children(self, cur, depth):
        blk = self.block(cur)
        out = [None] * self.kk
        nxt = cur + 1
        top = blk.bit_length() - 1
        for i in range(self.kk):
            if (blk >> i) & 1:
                out[i] = nxt
                if i != top:
                    nxt = self.skip_subtree(nxt, depth + 1)
        return out

    def child(self, cur, depth, i):
        blk = self.block(cur)
        if not (blk >> i) & 1:
            return None
        nxt = cur + 1
        for j in range(i):
            if (blk >> j) & 1:
                nxt = self.skip_subtree(nxt, depth + 1)
        return nxt

    def leaf_bits(self, cur) -> int:
        return self.block(cur)

    def subtree_rows(self, cur, depth):
        side = self.k ** (self.h - depth)
        rows = [0] * side
        if cur is None:
            return rows
        k, kk, last = self.k, self.kk, self.h - 1
        # sequential scan: stack of (remaining child digits, row0, col0, sub-side)
        stack = []
        i = cur
        d = depth
        r0 = c0 = 0
        sub = side
        while True:
            blk = self.block(i)
            i += 1
            if d == last:
                while blk:
                    low = blk & -blk
                    j = low.bit_length() - 1
                    rows[r0 + j // k] |= 1 << (c0 + j % k)
                    blk ^= low
            else:
                digits = [j for j in range(kk) if (blk >> j) & 1]
                stack.append((digits, r0, c0, sub // k))
            # advance to the next pending child
            while stack and not stack[-1][0]:
                stack.pop()
            if not stack:
                return rows
            digits, pr, pc, psub = stack[-1]
            j = digits.pop(0)
            r0 = pr + (j // k) * psub
            c0 = pc + (j % k) * psub
            sub = psub
            d = depth + len(stack)

    # -- decode ---------------------------------------------------------------
    def table(self) -> BlockTable:
        return BlockTable.from_dfs_blocks(self.k, self.n, self.h, self.blocks())

    def decode(self) -> CoordMatrix:
        return self.table().to_matrix()

    @property
    def nnz(self) -> int:
        if self._nnz is None:
            self._nnz = self.table().nnz()
        return self._nnz

    def components(self):
        return {"P": len(self.P)}

    def payload(self) -> bytes:
        return self.P.to_bytes()

    @classmethod
    def from_bytes(cls, buf: bytes) -> "DfTree":
        tag, k, n, h, body = parse_header(buf)
        if tag != cls.TAG:
            raise CorruptionError(f"expected representation tag {cls.TAG}, got {tag}")
        P, pos = BitSeq.read(body, HEADER_SIZE)
        if pos != len(body):
            raise CorruptionError("trailing bytes after P")
        t = cls(k, n, max(h, 1), P)
        t.table()  # validates the depth-first structure
        return t


def build_pdf(m: CoordMatrix, k: int = 2) -> DfTree:
    return DfTree.from_table(BlockTable.from_matrix(m, k))


def skip_subtree(t: DfTree, cursor: tuple[int, int]) -> tuple[int, int]:
    """Cursor ``(block, depth)`` at a subtree root -> cursor just past the subtree."""
    b, depth = cursor
    if b >= t.m:
        raise CorruptionError(f"cursor {b} is past the end of P")
    return t.skip_subtree(b, depth), depth


def get_cell_pdf(t: DfTree, r: int, c: int) -> int:
    return t.get_cell(r, c)


def pdf_from_canonical(t) -> DfTree:
    return DfTree.from_table(t.table())


def canonical_from_pdf(t: DfTree):
    from .k2canon import CanonicalTree

    return CanonicalTree.from_table(t.table())

