"""Balanced-parenthesis sequences with find_close/find_open and ``(())`` rank.

``(`` is stored as 1 and ``)`` as 0.  Matching queries scan bytes through
lookup tables inside a 256-bit block and jump between blocks using a
per-block (excess-before, min-excess) table.
"""

from __future__ import annotations

import numpy as np

from .bitseq import BitSeq, RankIndex

BLOCK = 256  # bits per excess block; 4 words

_TOT = [0] * 256
_MIN = [0] * 256  # min prefix excess over bits 0..7 (forward)
for _v in range(256):
    _e = 0
    _m = 9
    for _b in range(8):
        _e += 1 if (_v >> _b) & 1 else -1
        _m = min(_m, _e)
    _TOT[_v] = _e
    _MIN[_v] = _m
del _v, _e, _m, _b


class ParenSeq:
    __slots__ = ("bits", "_n", "_bytes", "_exb", "_bmin", "_np_bmin")

    def __init__(self, bits: BitSeq, check: bool = True):
        self.bits = bits
        self._n = n = len(bits)
        self._bytes = bits.words.astype("<u8").tobytes()
        nb = (n + BLOCK - 1) // BLOCK
        if n:
            steps = bits.to_numpy().astype(np.int64) * 2 - 1
            exc = np.cumsum(steps)
            if check and (exc[-1] != 0 or exc.min() < 0):
                raise ValueError("parenthesis sequence is not balanced")
            starts = np.arange(nb) * BLOCK
            bmin = np.minimum.reduceat(exc, starts)
            exb = np.concatenate([[0], exc[np.minimum(starts[1:], n) - 1], [exc[-1]]])
        else:
            bmin = np.zeros(0, dtype=np.int64)
            exb = np.zeros(1, dtype=np.int64)
        self._np_bmin = bmin.astype(np.int32)
        self._bmin = [int(x) for x in bmin]
        # _exb[b] = excess after position b*BLOCK - 1; last entry is the total
        self._exb = [int(x) for x in exb]

    @classmethod
    def from_string(cls, text: str, check: bool = True) -> "ParenSeq":
        s = "".join(text.split())
        if set(s) - {"(", ")"}:
            raise ValueError(f"not a parenthesis string: {text!r}")
        arr = np.frombuffer(s.encode(), dtype=np.uint8) == ord("(")
        return cls(BitSeq.from_bits(arr), check=check)

    def __len__(self) -> int:
        return self._n

    def __getitem__(self, i: int) -> int:
        return self.bits[i]

    def __eq__(self, other):
        if not isinstance(other, ParenSeq):
            return NotImplemented
        return self.bits == other.bits

    def __repr__(self):
        s = self.to_string()
        return f"ParenSeq({s if len(s) <= 64 else s[:61] + '...'!r})"

    def to_string(self) -> str:
        return self.bits.to_string().replace("1", "(").replace("0", ")")

    @property
    def overhead_bits(self) -> int:
        return 64 * len(self._bmin)

    def is_open(self, i: int) -> bool:
        return (self._bytes[i >> 3] >> (i & 7)) & 1 == 1

    def excess(self, i: int) -> int:
        """Excess (#open - #close) over positions 0..i inclusive."""
        b = i // BLOCK
        start = b * BLOCK
        ones = 0
        ws = self.bits._w
        w = start >> 6
        last = i >> 6
        while w < last:
            ones += ws[w].bit_count()
            w += 1
        ones += (ws[last] & ((2 << (i & 63)) - 1)).bit_count()
        return self._exb[b] + 2 * ones - (i - start + 1)

    def find_close(self, i: int) -> int:
        if not 0 <= i < self._n:
            raise IndexError(f"position {i} out of range")
        if not self.is_open(i):
            raise ValueError(f"position {i} holds ')'")
        e = self.excess(i)
        target = e - 1
        by = self._bytes
        n = self._n
        p = i + 1
        bend = min((i // BLOCK + 1) * BLOCK, n)
        while p < bend:
            if p & 7 or p + 8 > bend:
                e += 1 if (by[p >> 3] >> (p & 7)) & 1 else -1
                if e == target:
                    return p
                p += 1
                continue
            v = by[p >> 3]
            if e + _MIN[v] <= target:
                for _ in range(8):
                    e += 1 if v & 1 else -1
                    if e == target:
                        return p
                    v >>= 1
                    p += 1
            e += _TOT[v]
            p += 8
        b = self._next_block_le(i // BLOCK + 1, target)
        if b < 0:
            raise ValueError(f"no matching ')' for position {i}")
        e = self._exb[b]
        p = b * BLOCK
        bend = min(p + BLOCK, n)
        while p < bend:
            if p + 8 > bend:
                e += 1 if (by[p >> 3] >> (p & 7)) & 1 else -1
                if e == target:
                    return p
                p += 1
                continue
            v = by[p >> 3]
            if e + _MIN[v] <= target:
                for _ in range(8):
                    e += 1 if v & 1 else -1
                    if e == target:
                        return p
                    v >>= 1
                    p += 1
            e += _TOT[v]
            p += 8
        raise AssertionError("block minimum table is inconsistent")

    def _next_block_le(self, b: int, target: int) -> int:
        bm = self._bmin
        nb = len(bm)
        stop = min(nb, b + 16)
        while b < stop:
            if bm[b] <= target:
                return b
            b += 1
        if b >= nb:
            return -1
        hits = np.flatnonzero(self._np_bmin[b:] <= target)
        return b + int(hits[0]) if hits.size else -1

    def _prev_block_le(self, b: int, target: int) -> int:
        bm = self._bmin
        stop = max(-1, b - 16)
        while b > stop:
            if bm[b] <= target:
                return b
            b -= 1
        if b < 0:
            return -1
        hits = np.flatnonzero(self._np_bmin[: b + 1] <= target)
        return int(hits[-1]) if hits.size else -1

    def find_open(self, j: int) -> int:
        if not 0 <= j < self._n:
            raise IndexError(f"position {j} out of range")
        if self.is_open(j):
            raise ValueError(f"position {j} holds '('")
        target = self.excess(j)
        by = self._bytes
        # looking for the largest q < j with excess(q) <= target; answer is q + 1
        q = j - 1
        e = target + 1
        bstart = (j // BLOCK) * BLOCK
        while q >= bstart:
            if e <= target:
                return q + 1
            if (q & 7) != 7:
                e -= 1 if (by[q >> 3] >> (q & 7)) & 1 else -1
                q -= 1
                continue
            v = by[q >> 3]
            base = e - _TOT[v]
            if base + _MIN[v] <= target:
                # scan this byte from its high bit down
                while True:
                    if e <= target:
                        return q + 1
                    e -= 1 if (v >> (q & 7)) & 1 else -1
                    q -= 1
            e = base
            q -= 8
        b = self._prev_block_le(j // BLOCK - 1, target)
        if b < 0:
            if target == 0:
                return 0
            raise ValueError(f"no matching '(' for position {j}")
        q = min((b + 1) * BLOCK, self._n) - 1
        e = self._exb[b + 1]
        start = b * BLOCK
        while q >= start:
            if e <= target:
                return q + 1
            e -= 1 if (by[q >> 3] >> (q & 7)) & 1 else -1
            q -= 1
        raise AssertionError("block minimum table is inconsistent")


def find_close(p: ParenSeq, i: int) -> int:
    return p.find_close(i)


def find_open(p: ParenSeq, j: int) -> int:
    return p.find_open(j)


def pattern_marks(bits: np.ndarray) -> np.ndarray:
    """0/1 array marking every start of ``(())``."""
    b = np.asarray(bits, dtype=bool)
    marks = np.zeros(len(b), dtype=bool)
    if len(b) >= 4:
        marks[: len(b) - 3] = b[:-3] & b[1:-2] & ~b[2:-1] & ~b[3:]
    return marks


class PatternIndex:
    """Rank support for occurrences of ``(())``."""

    __slots__ = ("marks", "index")

    def __init__(self, parens: ParenSeq):
        m = pattern_marks(parens.bits.to_numpy())
        starts = np.flatnonzero(m)
        assert starts.size < 2 or np.diff(starts).min() >= 2, "overlapping (()) occurrences"
        self.marks = BitSeq.from_bits(m)
        self.index = RankIndex(self.marks)

    @property
    def count(self) -> int:
        return self.index.ones

    @property
    def overhead_bits(self) -> int:
        return len(self.marks) + self.index.overhead_bits

    def rank(self, i: int) -> int:
        return self.index.rank1(i)

    def is_start(self, i: int) -> bool:
        return self.marks.get(i) == 1


def rank_pattern(p: ParenSeq, idx: PatternIndex, i: int) -> int:
    """Occurrences of ``(())`` starting strictly before ``i``."""
    return idx.rank(i)
