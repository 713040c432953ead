"""Compressed BP: maximal repeated subtrees of B are replaced by ``(())``
pointers to their leftmost occurrence.

Two subtrees count as identical when their parenthesis strings match; their
L2 leaf blocks may differ, so every pruned copy keeps its own leaves in L2
and only borrows structure from the reference.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .base import HEADER_SIZE, BlockTable, parse_header, read_u64, read_u64_array
from .bitseq import BitSeq, RankIndex
from .errors import CorruptionError, StructureError
from .k2bp import BpTree
from .matrix import CoordMatrix
from .parens import ParenSeq, pattern_marks
from .suffix import build_suffix_index

DEFAULT_MIN_SPAN = 64


@dataclass
class PruneReport:
    entries: list[tuple[int, int, int]] = field(default_factory=list)  # (pruned_start, ref_start, span)

    @property
    def p(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def match_all(bits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Opening positions and their matching closes, for a whole sequence."""
    b = np.asarray(bits, dtype=np.int64)
    n = b.size
    exc = np.cumsum(2 * b - 1)
    opens = np.flatnonzero(b)
    closes = np.flatnonzero(b == 0)
    ckey = exc[closes] * (n + 1) + closes
    order = np.argsort(ckey, kind="stable")
    ckey = ckey[order]
    idx = np.searchsorted(ckey, (exc[opens] - 1) * (n + 1) + opens)
    return opens, closes[order][idx]


def _run_bounds(lcp: np.ndarray, x: int, ln: int) -> tuple[int, int]:
    """Maximal SA interval around ``x`` whose adjacent LCPs are all >= ``ln``."""
    n = lcp.size
    lo = x
    w = 16
    while True:
        a = max(0, lo - w + 1)
        bad = np.flatnonzero(lcp[a : lo + 1] < ln)
        if bad.size:
            lo = a + int(bad[-1])
            break
        lo = a - 1
        w *= 4
    hi = x
    w = 16
    while hi + 1 < n:
        b = min(n, hi + 1 + w)
        bad = np.flatnonzero(lcp[hi + 1 : b] < ln)
        if bad.size:
            hi = hi + int(bad[0])
            return lo, hi
        hi = b - 1
        w *= 4
    return lo, n - 1


def detect_identical(bp, min_span: int = DEFAULT_MIN_SPAN, index=None) -> PruneReport:
    """Left-to-right scan of B for maximal subtrees that also occur earlier.

    ``bp`` is a BpTree or a ParenSeq.  Subtrees of ``min_span`` parentheses
    or fewer are never pruned.
    """
    if min_span < 6:
        raise ValueError("min_span must be at least 6")
    B = bp.B if isinstance(bp, BpTree) else bp
    bits = B.bits.to_numpy()
    report = PruneReport()
    if bits.size == 0:
        return report
    opens, close = match_all(bits)
    span = close - opens + 1
    keep = span > min_span
    cand, cspan = opens[keep].tolist(), span[keep].tolist()
    if not cand:
        return report
    sidx = index if index is not None else build_suffix_index(B)
    sa, isa, lcp = sidx.sa, sidx.isa, sidx.lcp
    resume = 0
    for j, ln in zip(cand, cspan):
        if j < resume:
            continue
        lo, hi = _run_bounds(lcp, int(isa[j]), ln)
        ref = int(sa[lo : hi + 1].min())
        if ref < j:
            report.entries.append((j, ref, ln))
            resume = j + ln
    return report


def verify_lemma(b: ParenSeq, i: int, j: int) -> bool:
    """Are the subtrees starting at ``i`` and ``j`` identical?

    Computed twice, by substring comparison and by walking both trees; the
    two answers must agree.
    """
    if not (b.is_open(i) and b.is_open(j)):
        raise ValueError("both positions must hold '('")
    c = b.find_close(i)
    ln = c - i + 1
    if j + ln > len(b):
        by_string = False
    else:
        s = b.bits.to_numpy()
        by_string = bool(np.array_equal(s[i : c + 1], s[j : j + ln]))

    def same(x: int, y: int) -> bool:
        cx, cy = x + 1, y + 1
        while True:
            ox, oy = b.is_open(cx), b.is_open(cy)
            if ox != oy:
                return False
            if not ox:
                return True
            if not same(cx, cy):
                return False
            cx, cy = b.find_close(cx) + 1, b.find_close(cy) + 1

    by_tree = same(i, j)
    assert by_string == by_tree, f"lemma check disagrees at ({i}, {j})"
    return by_tree


class CbpTree(BpTree):
    TAG = 0x05
    name = "cbp"

    def __init__(self, k, n, h, CBP: ParenSeq, L2: BitSeq, Sc: BitSeq, Tar, leafCounts,
                 min_span: int = DEFAULT_MIN_SPAN):
        self.Sc = Sc
        self.ScRank = RankIndex(Sc)
        self.Tar = [int(x) for x in Tar]
        self.leafCounts = [int(x) for x in leafCounts]
        self.min_span = min_span
        pref = [0]
        for c in self.leafCounts:
            pref.append(pref[-1] + c)
        self._pref = pref
        super().__init__(k, n, h, CBP, L2)
        self.CBP = CBP

    def _check_patterns(self):
        p = self.ScRank.ones
        if len(self.Sc) != self.pat.count:
            raise CorruptionError(f"Sc has {len(self.Sc)} bits for {self.pat.count} (()) occurrences")
        if p != len(self.Tar) or p != len(self.leafCounts):
            raise CorruptionError("pointer count disagrees between Sc, Tar and leafCounts")
        if len(self.Sc) - p + self._pref[-1] != self.leafBlocks:
            raise CorruptionError("leaf counts do not account for every L2 block")
        if any(not 0 <= t < len(self.B) or not self.B.is_open(t) for t in self.Tar):
            raise CorruptionError("pointer target is not an opening parenthesis")
        self.t = None

    @property
    def p(self) -> int:
        return len(self.Tar)

    @classmethod
    def from_table(cls, table: BlockTable, min_span: int = DEFAULT_MIN_SPAN) -> "CbpTree":
        bp = BpTree.from_table(table)
        return build_cbp(bp, detect_identical(bp, min_span), min_span)

    # -- pointers -----------------------------------------------------------------
    def leaf_offset(self, pos: int) -> int:
        r = self.pat.rank(pos)
        v = self.ScRank._rank1(r)
        return r - v + self._pref[v]

    def resolve_pointer(self, pos: int) -> tuple[int, int]:
        """(reference start, first L2 block of this pruned copy)."""
        if not (0 <= pos < len(self.B)) or not self.pat.is_start(pos):
            raise StructureError(f"no (()) starts at position {pos}")
        r = self.pat.rank(pos)
        if not self.Sc.get(r):
            raise StructureError(f"(()) at {pos} is a level h-1 node, not a pointer")
        v = self.ScRank._rank1(r)
        return self.Tar[v], r - v + self._pref[v]

    def _pointer_target(self, pos, depth):
        if depth >= self.h - 1 or not self.pat.is_start(pos):
            return None
        r = self.pat.rank(pos)
        if not self.Sc.get(r):
            raise CorruptionError(f"level h-1 pattern found above level h-1 at {pos}")
        return self.Tar[self.ScRank._rank1(r)]

    def _enter(self, q, depth, delta):
        tgt = self._pointer_target(q, depth)
        if tgt is None:
            return (q, delta)
        return (tgt, delta + self.leaf_offset(q) - self.leaf_offset(tgt))

    def _check_leaf_cursor(self, pos, lc, expanding):
        if not expanding:
            base = self.resolve_pointer(pos)[1]
            if base != lc:
                raise CorruptionError(f"pointer at {pos}: leaf cursor {lc}, expected {base}")

    def _check_pointer_leaves(self, pos, used):
        r = self.pat.rank(pos)
        want = self.leafCounts[self.ScRank._rank1(r)]
        if used != want:
            raise CorruptionError(f"pointer at {pos} consumed {used} leaf blocks, expected {want}")

    def pointer_positions(self) -> np.ndarray:
        occ = np.flatnonzero(self.pat.marks.to_numpy())
        return occ[self.Sc.to_numpy().astype(bool)]

    def expand(self) -> ParenSeq:
        """Replace every pointer by its reference, recursively."""
        bits = self.B.bits.to_numpy()
        ptrs = self.pointer_positions()
        tar = self.Tar
        find_close = self.B.find_close

        def segs(a: int, b: int, depth: int) -> list:
            if depth > len(ptrs) + 1:
                raise CorruptionError("pointer cycle")
            out = []
            i = a
            lo = int(np.searchsorted(ptrs, a))
            hi = int(np.searchsorted(ptrs, b))
            for v in range(lo, hi):
                p = int(ptrs[v])
                out.append(bits[i:p])
                t = tar[v]
                out.extend(segs(t, find_close(t) + 1, depth + 1))
                i = p + 4
            out.append(bits[i:b])
            return out

        return ParenSeq(BitSeq.from_bits(np.concatenate(segs(0, len(bits), 0))), check=False)

    # -- space & io -----------------------------------------------------------------
    def components(self):
        def width(xs):
            return max([1] + [int(x).bit_length() for x in xs])

        c = super().components()
        c.update(
            {
                "Sc": len(self.Sc),
                "Sc_index": self.ScRank.overhead_bits,
                "Tar": len(self.Tar) * width(self.Tar),
                "leafCounts": len(self.leafCounts) * width(self.leafCounts),
                "leafCounts_prefix": len(self._pref) * width(self._pref),
            }
        )
        return c

    def payload(self) -> bytes:
        return (
            self.B.bits.to_bytes()
            + self.L2.to_bytes()
            + self.Sc.to_bytes()
            + struct.pack("<Q", len(self.Tar))
            + np.asarray(self.Tar, dtype="<u8").tobytes()
            + np.asarray(self.leafCounts, dtype="<u8").tobytes()
        )

    @classmethod
    def from_bytes(cls, buf: bytes, min_span: int = DEFAULT_MIN_SPAN) -> "CbpTree":
        tag, k, n, h, body = parse_header(buf)
        if tag != cls.TAG:
            raise CorruptionError(f"expected representation tag {cls.TAG}, got {tag}")
        Bb, pos = BitSeq.read(body, HEADER_SIZE)
        L2, pos = BitSeq.read(body, pos)
        Sc, pos = BitSeq.read(body, pos)
        p, pos = read_u64(body, pos)
        tar, pos = read_u64_array(body, pos, p)
        lcs, pos = read_u64_array(body, pos, p)
        if pos != len(body):
            raise CorruptionError("trailing bytes after leafCounts")
        try:
            B = ParenSeq(Bb)
        except ValueError as exc:
            raise CorruptionError(str(exc)) from None
        return cls(k, n, max(h, 1), B, L2, Sc, tar, lcs, min_span)


def build_cbp(bp: BpTree, report: PruneReport, min_span: int = DEFAULT_MIN_SPAN) -> CbpTree:
    B = bp.B
    bits = B.bits.to_numpy()
    entries = sorted(report.entries)
    starts = np.asarray([e[0] for e in entries], dtype=np.int64)
    spans = np.asarray([e[2] for e in entries], dtype=np.int64)
    ends = starts + spans  # exclusive
    for (s, r, ln), prev_end in zip(entries, [0] + ends[:-1].tolist()):
        if s < prev_end:
            raise StructureError(f"pruned region at {s} overlaps the previous one")
        if not r < s:
            raise StructureError(f"reference {r} does not precede pruned subtree {s}")
        if B.find_close(s) != s + ln - 1 or B.find_close(r) != r + ln - 1:
            raise StructureError(f"region at {s} or its reference {r} is not a subtree of span {ln}")
        if not np.array_equal(bits[s : s + ln], bits[r : r + ln]):
            raise StructureError(f"subtree at {s} differs from its reference {r}")
        k_ = int(np.searchsorted(starts, r, side="right")) - 1
        if k_ >= 0 and r < ends[k_]:
            raise StructureError(f"reference {r} lies inside pruned region {int(starts[k_])}")
    saved = np.concatenate([[0], np.cumsum(spans - 4)])

    def remap(pos: int) -> int:
        # every pruned region wholly before pos shrinks to 4 symbols
        k_ = int(np.searchsorted(ends, pos, side="right"))
        return pos - int(saved[k_])

    pieces = []
    i = 0
    ptr_pos = []
    for s, e in zip(starts.tolist(), ends.tolist()):
        pieces.append(bits[i:s])
        ptr_pos.append(remap(s))
        pieces.append(np.array([1, 1, 0, 0], dtype=np.uint8))
        i = e
    pieces.append(bits[i:])
    new_bits = np.concatenate(pieces)
    occ = np.flatnonzero(pattern_marks(new_bits))
    Sc = np.isin(occ, np.asarray(ptr_pos, dtype=np.int64))
    if int(Sc.sum()) != len(entries):
        raise StructureError("a pointer does not surface as a (()) occurrence")
    tar = [remap(r) for _, r, _ in entries]
    rank = bp.pat.rank
    leaf_counts = [rank(e) - rank(s) for s, e in zip(starts.tolist(), ends.tolist())]
    return CbpTree(
        bp.k,
        bp.n,
        bp.h,
        ParenSeq(BitSeq.from_bits(new_bits), check=False),
        bp.L2,
        BitSeq.from_bits(Sc),
        tar,
        leaf_counts,
        min_span,
    )


def build_cbp_from_matrix(m: CoordMatrix, k: int = 2, min_span: int = DEFAULT_MIN_SPAN) -> CbpTree:
    return CbpTree.from_table(BlockTable.from_matrix(m, k), min_span)


def resolve_pointer(t: CbpTree, pos: int) -> tuple[int, int]:
    return t.resolve_pointer(pos)


def decode_cbp(t: CbpTree) -> CoordMatrix:
    return t.decode()
