"""Enriched depth-first representation: P plus skip records in a byte array S.

A node owns a record iff its subtree holds more than ``tau`` blocks.  The
record lists, for every internal child except the last, the pair
(subtree blocks, bytes of S used inside that subtree), both as varuints.
The last child's block count is implied by the owner's size.
"""

from __future__ import annotations

import math
import struct

import numpy as np

from .base import HEADER_SIZE, BlockTable, K2Tree, bitseq_from_blocks, parse_header
from .bitseq import BitSeq, decode_varuint, encode_varuint
from .errors import CorruptionError, NavigationError
from .k2pdf import DfTree
from .matrix import CoordMatrix


def default_tau(blocks: int) -> int:
    return max(1, math.isqrt(blocks - 1) + 1) if blocks > 1 else 1


class EdfTree(K2Tree):
    TAG = 0x03
    name = "edf"

    def __init__(self, k, n, h, P: BitSeq, S: bytes, tau: int, root_blocks: int):
        self.df = DfTree(k, n, h, P)
        if root_blocks != self.df.m:
            raise CorruptionError(f"header says {root_blocks} blocks, P holds {self.df.m}")
        self.k, self.n, self.h = k, n, h
        self.P = P
        self.S = bytes(S)
        self.tau = tau
        self.root_blocks = root_blocks

    @classmethod
    def from_table(cls, table: BlockTable, tau: int | None = None) -> "EdfTree":
        m = len(table)
        if tau is None:
            tau = default_tau(m)
        if tau < 0:
            raise ValueError("tau must be non-negative")
        sizes = table.subtree_sizes().tolist()
        depth = table.depth.tolist()
        last = table.h - 1
        # internal children of each node, via subtree sizes
        kids: list[list[int]] = [[] for _ in range(m)]
        for i in range(m):
            if depth[i] < last and sizes[i] > 1:
                c = i + 1
                end = i + sizes[i]
                while c < end:
                    kids[i].append(c)
                    c += sizes[c]
        record = [b""] * m
        inside = [0] * m  # bytes of S within each subtree, own record included
        for i in range(m - 1, -1, -1):
            ch = kids[i]
            if sizes[i] > tau:
                record[i] = b"".join(
                    encode_varuint(sizes[c]) + encode_varuint(inside[c]) for c in ch[:-1]
                )
            inside[i] = len(record[i]) + sum(inside[c] for c in ch)
        for i in range(m):
            if sizes[i] > tau and kids[i]:
                derived = sizes[i] - 1 - sum(sizes[c] for c in kids[i][:-1])
                assert derived == sizes[kids[i][-1]] >= 1, f"skip record of node {i} is inconsistent"
        t = cls(table.k, table.n, table.h, bitseq_from_blocks(table.bits, table.kk), b"".join(record), tau, m)
        t.df._nnz = table.nnz()
        return t

    # -- navigation -------------------------------------------------------------
    # cursor = (block index, S offset, subtree blocks or None when <= tau)
    def root(self):
        if not self.df.block(0):
            return None
        return (0, 0, self.root_blocks)

    def _record(self, cur, blk):
        """Decode the record owned by ``cur``; returns (sizes, s_bytes, record length)."""
        b, s, size = cur
        nint = blk.bit_count() - 1
        sizes, sb = [], []
        pos = s
        for _ in range(max(nint, 0)):
            v, pos = decode_varuint(self.S, pos)
            w, pos = decode_varuint(self.S, pos)
            sizes.append(v)
            sb.append(w)
        return sizes, sb, pos - s

    def children(self, cur, depth):
        b, s, size = cur
        blk = self.df.block(b)
        kk = self.kk
        out = [None] * kk
        if depth >= self.h - 1:
            raise NavigationError("level h-1 nodes have no child blocks")
        digits = [i for i in range(kk) if (blk >> i) & 1]
        if size is not None and size > self.tau:
            sizes, sb, rec = self._record(cur, blk)
            sizes.append(size - 1 - sum(sizes))
            pb, ps = b + 1, s + rec
            for n_, i in enumerate(digits):
                csize = sizes[n_]
                out[i] = (pb, ps, csize)
                if n_ < len(sb):
                    pb += csize
                    ps += sb[n_]
        else:
            pb = b + 1
            for n_, i in enumerate(digits):
                out[i] = (pb, s, None)
                if n_ + 1 < len(digits):
                    pb = self.df.skip_subtree(pb, depth + 1)
        return out

    def child_cursor(self, cur, depth: int, i: int):
        if not 0 <= i < self.kk:
            raise IndexError(f"child index {i} out of range")
        ch = self.children(cur, depth)[i]
        if ch is None:
            raise NavigationError(f"child {i} is a zero leaf")
        return ch

    def leaf_bits(self, cur) -> int:
        return self.df.block(cur[0])

    def subtree_rows(self, cur, depth):
        return self.df.subtree_rows(None if cur is None else cur[0], depth)

    def owners(self) -> list[int]:
        """Block indices of record owners, walking with skip records only."""
        found = []

        def walk(cur, depth):
            b, s, size = cur
            if size is not None and size > self.tau:
                found.append(b)
            if depth < self.h - 1:
                for ch in self.children(cur, depth):
                    if ch is not None and ch[2] is not None:
                        walk(ch, depth + 1)

        r = self.root()
        if r is not None:
            walk(r, 0)
        return found

    # -- decode ---------------------------------------------------------------
    def table(self) -> BlockTable:
        return self.df.table()

    def decode(self) -> CoordMatrix:
        """Decode by descending through skip records (no P scan)."""
        rows, cols = [], []
        k, kk = self.k, self.kk

        def walk(cur, depth, r0, c0, sub):
            if depth == self.h - 1:
                blk = self.leaf_bits(cur)
                for d in range(kk):
                    if (blk >> d) & 1:
                        rows.append(r0 + d // k)
                        cols.append(c0 + d % k)
                return
            sub //= k
            for i, ch in enumerate(self.children(cur, depth)):
                if ch is not None:
                    walk(ch, depth + 1, r0 + (i // k) * sub, c0 + (i % k) * sub, sub)

        r = self.root()
        if r is not None:
            walk(r, 0, 0, 0, self.side)
        rows_a = np.asarray(rows, dtype=np.int64)
        cols_a = np.asarray(cols, dtype=np.int64)
        keep = (rows_a < self.n) & (cols_a < self.n)
        return CoordMatrix(self.n, rows_a[keep], cols_a[keep])

    def strip(self) -> DfTree:
        return self.df

    @property
    def nnz(self) -> int:
        return self.df.nnz

    def components(self):
        return {"P": len(self.P), "S": 8 * len(self.S), "header": 128}

    def payload(self) -> bytes:
        return (
            struct.pack("<QQ", self.tau, self.root_blocks)
            + self.P.to_bytes()
            + struct.pack("<Q", len(self.S))
            + self.S
        )

    @classmethod
    def from_bytes(cls, buf: bytes) -> "EdfTree":
        tag, k, n, h, body = parse_header(buf)
        if tag != cls.TAG:
            raise CorruptionError(f"expected representation tag {cls.TAG}, got {tag}")
        pos = HEADER_SIZE
        if pos + 16 > len(body):
            raise CorruptionError("truncated EDF header")
        tau, root_blocks = struct.unpack_from("<QQ", body, pos)
        P, pos = BitSeq.read(body, pos + 16)
        if pos + 8 > len(body):
            raise CorruptionError("truncated S length")
        (slen,) = struct.unpack_from("<Q", body, pos)
        pos += 8
        if pos + slen != len(body):
            raise CorruptionError("S length does not match the file")
        return cls(k, n, max(h, 1), P, body[pos : pos + slen], tau, root_blocks)


def build_edf(m: CoordMatrix, k: int = 2, tau: int | None = None) -> EdfTree:
    return EdfTree.from_table(BlockTable.from_matrix(m, k), tau)


def child_cursor(t: EdfTree, cursor, depth: int, i: int):
    return t.child_cursor(cursor, depth, i)


def get_cell_edf(t: EdfTree, r: int, c: int) -> int:
    return t.get_cell(r, c)


def decode_edf(t: EdfTree) -> CoordMatrix:
    return t.decode()
