"""Shared machinery: the depth-first block table every representation is built
from, Morton-order helpers, and the common tree interface."""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .bitseq import BitSeq
from .errors import CorruptionError
from .matrix import CoordMatrix, PaddedShape, pad_shape

MAGIC = b"K2DF"
VERSION = 1


def tree_height(n: int, k: int) -> int:
    """Height used for storage; an n=1 matrix is stored like an n=k one."""
    return max(pad_shape(n, k).h, 1)


def _digits(rows: np.ndarray, cols: np.ndarray, h: int, k: int) -> np.ndarray:
    """Quadrant digit of every cell at every level, shape (h, nnz)."""
    out = np.empty((h, rows.size), dtype=np.int64)
    for lvl in range(h):
        div = k ** (h - 1 - lvl)
        out[lvl] = ((rows // div) % k) * k + (cols // div) % k
    return out


def morton_keys(rows: np.ndarray, cols: np.ndarray, h: int, k: int) -> np.ndarray:
    kk = k * k
    if h * np.log2(kk) >= 63:
        raise OverflowError(f"k={k}, h={h} exceeds 63-bit Morton keys")
    key = np.zeros(rows.size, dtype=np.int64)
    for d in _digits(rows, cols, h, k):
        key = key * kk + d
    return key


def morton_decode(keys: np.ndarray, h: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    kk = k * k
    keys = np.asarray(keys, dtype=np.int64)
    rows = np.zeros(keys.size, dtype=np.int64)
    cols = np.zeros(keys.size, dtype=np.int64)
    scale = 1
    for _ in range(h):
        d = keys % kk
        keys = keys // kk
        rows += (d // k) * scale
        cols += (d % k) * scale
        scale *= k
    return rows, cols


def blocks_to_bits(blocks: np.ndarray, kk: int) -> np.ndarray:
    """Expand k^2-bit child masks into a flat 0/1 array, child 0 first."""
    b = np.asarray(blocks, dtype=np.uint64)
    shifts = np.arange(kk, dtype=np.uint64)
    return ((b[:, None] >> shifts) & np.uint64(1)).astype(np.uint8).ravel()


def bits_to_blocks(bits: np.ndarray, kk: int) -> np.ndarray:
    b = np.asarray(bits, dtype=np.uint64).reshape(-1, kk)
    return (b << np.arange(kk, dtype=np.uint64)).sum(axis=1).astype(np.uint64)


@dataclass
class BlockTable:
    """Internal nodes of a k^2-tree in depth-first order.

    ``prefix`` is the node's path as a base-k^2 number of ``depth`` digits and
    ``bits`` its k^2 child bits (child j at bit j).  An empty matrix is a lone
    root with an all-zero block.
    """

    k: int
    n: int
    h: int
    prefix: np.ndarray
    depth: np.ndarray
    bits: np.ndarray

    def __len__(self) -> int:
        return int(self.bits.size)

    @property
    def kk(self) -> int:
        return self.k * self.k

    def padded_keys(self) -> np.ndarray:
        kk = self.kk
        scale = np.array([kk ** (self.h - d) for d in range(self.h + 1)], dtype=np.int64)
        return self.prefix * scale[self.depth]

    def level_order(self) -> np.ndarray:
        """Permutation from DFS order to level order (stable by depth)."""
        return np.argsort(self.depth, kind="stable")

    def subtree_sizes(self) -> np.ndarray:
        """Blocks in each node's subtree, in DFS order."""
        depth = self.depth.tolist()
        m = len(depth)
        size = [0] * m
        stack: list[int] = []
        for i, d in enumerate(depth):
            while stack and depth[stack[-1]] >= d:
                j = stack.pop()
                size[j] = i - j
            stack.append(i)
        for j in stack:
            size[j] = m - j
        return np.asarray(size, dtype=np.int64)

    def nnz(self) -> int:
        leaf = self.depth == self.h - 1
        return int(sum(int(x).bit_count() for x in self.bits[leaf].tolist()))

    def to_matrix(self) -> CoordMatrix:
        leaf = self.depth == self.h - 1
        pre = self.prefix[leaf]
        blk = self.bits[leaf].astype(np.uint64)
        kk = self.kk
        flags = blocks_to_bits(blk, kk).reshape(-1, kk).astype(bool)
        keys = (pre[:, None] * kk + np.arange(kk)[None, :])[flags]
        r, c = morton_decode(keys, self.h, self.k)
        keep = (r < self.n) & (c < self.n)
        return CoordMatrix(self.n, r[keep], c[keep])

    @classmethod
    def from_matrix(cls, m: CoordMatrix, k: int = 2) -> "BlockTable":
        h = tree_height(m.n, k)
        kk = k * k
        if m.nnz == 0:
            z = np.zeros(1, dtype=np.int64)
            return cls(k, m.n, h, z, np.zeros(1, dtype=np.int8), np.zeros(1, dtype=np.uint64))
        keys = np.sort(morton_keys(m.rows, m.cols, h, k))
        pre_all, dep_all, bit_all = [], [], []
        for lvl in range(h):
            pref = keys // kk ** (h - lvl)
            digit = (keys // kk ** (h - 1 - lvl)) % kk
            starts = np.flatnonzero(np.concatenate([[True], pref[1:] != pref[:-1]]))
            masks = np.left_shift(np.uint64(1), digit.astype(np.uint64))
            pre_all.append(pref[starts])
            dep_all.append(np.full(starts.size, lvl, dtype=np.int8))
            bit_all.append(np.bitwise_or.reduceat(masks, starts))
        t = cls(k, m.n, h, np.concatenate(pre_all), np.concatenate(dep_all), np.concatenate(bit_all))
        order = np.lexsort((t.depth, t.padded_keys()))
        return t.permuted(order)

    def permuted(self, order) -> "BlockTable":
        return BlockTable(self.k, self.n, self.h, self.prefix[order], self.depth[order], self.bits[order])

    @classmethod
    def from_dfs_blocks(cls, k: int, n: int, h: int, blocks) -> "BlockTable":
        """Recover depths and prefixes from blocks in DFS order."""
        kk = k * k
        blocks = [int(b) for b in blocks]
        m = len(blocks)
        prefix = [0] * m
        depth = [0] * m
        # stack of (prefix, depth, remaining child digits) for open nodes
        stack: list[list] = []
        for i, b in enumerate(blocks):
            if i == 0:
                p, d = 0, 0
            else:
                while stack and not stack[-1][2]:
                    stack.pop()
                if not stack:
                    raise CorruptionError(f"block {i} has no parent in the depth-first order")
                top = stack[-1]
                digit = top[2].pop(0)
                p, d = top[0] * kk + digit, top[1] + 1
            prefix[i], depth[i] = p, d
            if d < h - 1:
                stack.append([p, d, [j for j in range(kk) if (b >> j) & 1]])
        while stack and not stack[-1][2]:
            stack.pop()
        if stack:
            raise CorruptionError("depth-first block sequence ends inside a subtree")
        return cls(
            k,
            n,
            h,
            np.asarray(prefix, dtype=np.int64),
            np.asarray(depth, dtype=np.int8),
            np.asarray(blocks, dtype=np.uint64),
        )


class BuildBuffer:
    """Append-only depth-first block accumulator; finalizes to any representation."""

    def __init__(self, k: int, n: int, h: int):
        self.k, self.n, self.h = k, n, h
        self.prefix: list[int] = []
        self.depth: list[int] = []
        self.bits: list[int] = []

    def __len__(self):
        return len(self.bits)

    def append(self, prefix: int, depth: int, bits: int) -> None:
        self.prefix.append(prefix)
        self.depth.append(depth)
        self.bits.append(bits)

    def extend(self, prefix, depth, bits) -> None:
        self.prefix.extend(np.asarray(prefix).tolist())
        self.depth.extend(np.asarray(depth).tolist())
        self.bits.extend(np.asarray(bits).tolist())

    def table(self) -> BlockTable:
        if not self.bits:
            z = np.zeros(1, dtype=np.int64)
            return BlockTable(self.k, self.n, self.h, z, np.zeros(1, dtype=np.int8), np.zeros(1, dtype=np.uint64))
        return BlockTable(
            self.k,
            self.n,
            self.h,
            np.asarray(self.prefix, dtype=np.int64),
            np.asarray(self.depth, dtype=np.int8),
            np.asarray(self.bits, dtype=np.uint64),
        )

    def finalize(self, rep: str, **opts):
        from .reps import from_table

        return from_table(rep, self.table(), **opts)


class K2Tree:
    """Common surface of the five representations.

    Subclasses provide ``root()``, ``children()``, ``leaf_bits()`` for
    navigation, plus ``decode()``, ``components()`` and (de)serialization.
    Cursors are opaque hashable values; ``None`` marks an all-zero subtree.
    """

    TAG = 0
    name = "?"
    k: int
    n: int
    h: int

    @property
    def shape(self) -> PaddedShape:
        return pad_shape(self.n, self.k)

    @property
    def kk(self) -> int:
        return self.k * self.k

    @property
    def side(self) -> int:
        return self.k**self.h

    # -- navigation ---------------------------------------------------------
    def root(self):
        raise NotImplementedError

    def children(self, cur, depth: int) -> list:
        raise NotImplementedError

    def leaf_bits(self, cur) -> int:
        raise NotImplementedError

    def _check_cell(self, r: int, c: int) -> None:
        if not (0 <= r < self.n and 0 <= c < self.n):
            raise IndexError(f"cell ({r}, {c}) outside the {self.n}x{self.n} matrix")

    def get_cell(self, r: int, c: int) -> int:
        self._check_cell(r, c)
        k = self.k
        cur = self.root()
        div = self.side // k
        for depth in range(self.h - 1):
            if cur is None:
                return 0
            digit = ((r // div) % k) * k + (c // div) % k
            cur = self.child(cur, depth, digit)
            div //= k
        if cur is None:
            return 0
        digit = (r % k) * k + c % k
        return (self.leaf_bits(cur) >> digit) & 1

    def child(self, cur, depth: int, i: int):
        return self.children(cur, depth)[i]

    def row_successors(self, r: int) -> list[int]:
        if not 0 <= r < self.n:
            raise IndexError(f"row {r} outside [0, {self.n})")
        out: list[int] = []
        k = self.k

        def walk(cur, depth, col0, div):
            if cur is None:
                return
            rd = (r // div) % k
            if depth == self.h - 1:
                bits = self.leaf_bits(cur)
                for j in range(k):
                    if (bits >> (rd * k + j)) & 1:
                        out.append(col0 + j)
                return
            kids = self.children(cur, depth)
            for j in range(k):
                walk(kids[rd * k + j], depth + 1, col0 + j * div, div // k)

        walk(self.root(), 0, 0, self.side // k)
        return [c for c in out if c < self.n]

    def subtree_rows(self, cur, depth: int) -> list[int]:
        """Row bitmasks (bit c = column c) of the submatrix under ``cur``."""
        side = self.k ** (self.h - depth)
        rows = [0] * side
        k = self.k

        def walk(cur, depth, r0, c0, sub):
            if depth == self.h - 1:
                bits = self.leaf_bits(cur)
                for d in range(self.kk):
                    if (bits >> d) & 1:
                        rows[r0 + d // k] |= 1 << (c0 + d % k)
                return
            sub //= k
            for i, ch in enumerate(self.children(cur, depth)):
                if ch is not None:
                    walk(ch, depth + 1, r0 + (i // k) * sub, c0 + (i % k) * sub, sub)

        if cur is not None:
            walk(cur, depth, 0, 0, side)
        return rows

    def decode(self) -> CoordMatrix:
        return self.table().to_matrix()

    def table(self) -> BlockTable:
        """Depth-first block table recovered through this representation."""
        raise NotImplementedError

    # -- space --------------------------------------------------------------
    def components(self) -> dict[str, int]:
        """Named component sizes in bits (payload and index overhead)."""
        raise NotImplementedError

    def size_bits(self) -> int:
        return sum(self.components().values())

    @property
    def nnz(self) -> int:
        raise NotImplementedError

    def bpn(self) -> float:
        nnz = self.nnz
        return float("inf") if nnz == 0 else self.size_bits() / nnz

    # -- serialization --------------------------------------------------------
    def header(self) -> bytes:
        return MAGIC + struct.pack("<BBBQB", VERSION, self.TAG, self.k, self.n, pad_shape(self.n, self.k).h)

    def payload(self) -> bytes:
        raise NotImplementedError

    def to_bytes(self) -> bytes:
        body = self.header() + self.payload()
        return body + struct.pack("<I", zlib.crc32(body))


HEADER_SIZE = 4 + 1 + 1 + 1 + 8 + 1


def parse_header(buf: bytes) -> tuple[int, int, int, int, bytes]:
    """Validate magic, version and checksum; returns (tag, k, n, h, body)."""
    if len(buf) < HEADER_SIZE + 4 or buf[:4] != MAGIC:
        raise CorruptionError("not a k2df file (bad magic)")
    body, (crc,) = buf[:-4], struct.unpack("<I", buf[-4:])
    if zlib.crc32(body) != crc:
        raise CorruptionError("checksum mismatch")
    version, tag, k, n, h = struct.unpack_from("<BBBQB", buf, 4)
    if version != VERSION:
        raise CorruptionError(f"unsupported format version {version}")
    if k < 2 or n < 1 or pad_shape(n, k).h != h:
        raise CorruptionError(f"inconsistent header k={k} n={n} h={h}")
    return tag, k, n, h, body


def read_u64(buf: bytes, pos: int) -> tuple[int, int]:
    if pos + 8 > len(buf):
        raise CorruptionError("truncated integer field")
    return struct.unpack_from("<Q", buf, pos)[0], pos + 8


def read_u64_array(buf: bytes, pos: int, count: int) -> tuple[np.ndarray, int]:
    end = pos + 8 * count
    if end > len(buf):
        raise CorruptionError("truncated integer array")
    return np.frombuffer(buf, dtype="<u8", count=count, offset=pos).astype(np.int64), end


def bitseq_from_blocks(blocks: np.ndarray, kk: int) -> BitSeq:
    return BitSeq.from_bits(blocks_to_bits(blocks, kk))
