"""Packed bit arrays, a two-level rank index, and base-128 varints.

Bit ``i`` of a sequence lives in word ``i // 64`` at bit position ``i % 64``
(LSB first).  Bit strings in tests and docs are read left to right as
positions 0, 1, 2, ...
"""

from __future__ import annotations

import struct
from bisect import bisect_left

import numpy as np

from .errors import CorruptionError, MalformedEncoding

WORD = 64
SUPERBLOCK = 512  # bits; 8 words
_U64 = (1 << 64) - 1


def _pack(bits: np.ndarray) -> np.ndarray:
    """Pack a 0/1 array into little-endian uint64 words."""
    raw = np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little")
    pad = (-len(raw)) % 8
    if pad:
        raw = np.concatenate([raw, np.zeros(pad, dtype=np.uint8)])
    return raw.view("<u8").astype(np.uint64)


class BitSeq:
    """Immutable word-packed bit array."""

    __slots__ = ("_len", "words", "_w")

    def __init__(self, words, length: int):
        words = np.ascontiguousarray(words, dtype=np.uint64)
        if len(words) != (length + WORD - 1) // WORD:
            raise CorruptionError(f"{len(words)} words cannot hold {length} bits")
        tail = length % WORD
        if tail and int(words[-1]) >> tail:
            raise CorruptionError("nonzero bits past the end of the sequence")
        self._len = length
        self.words = words
        self._w = [int(x) for x in words]

    @classmethod
    def from_bits(cls, bits) -> "BitSeq":
        arr = np.asarray(bits, dtype=np.uint8).ravel()
        if arr.size and arr.max() > 1:
            raise ValueError("bit values must be 0 or 1")
        return cls(_pack(arr), int(arr.size))

    @classmethod
    def from_string(cls, text: str) -> "BitSeq":
        """Parse ``"0110 1000"``; whitespace is ignored."""
        s = "".join(text.split())
        if set(s) - {"0", "1"}:
            raise ValueError(f"not a bit string: {text!r}")
        return cls.from_bits(np.frombuffer(s.encode(), dtype=np.uint8) - ord("0"))

    @classmethod
    def empty(cls) -> "BitSeq":
        return cls(np.zeros(0, dtype=np.uint64), 0)

    def __len__(self) -> int:
        return self._len

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self._len:
            raise IndexError(f"bit {i} out of range [0, {self._len})")
        return (self._w[i >> 6] >> (i & 63)) & 1

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitSeq):
            return NotImplemented
        return self._len == other._len and self._w == other._w

    def __hash__(self):
        return hash((self._len, tuple(self._w)))

    def __repr__(self) -> str:
        s = self.to_string()
        if len(s) > 64:
            s = s[:61] + "..."
        return f"BitSeq({s!r}, len={self._len})"

    def get(self, i: int) -> int:
        """Unchecked bit access."""
        return (self._w[i >> 6] >> (i & 63)) & 1

    def get_bits(self, pos: int, width: int) -> int:
        """Return ``width`` (<= 64) bits starting at ``pos`` as an integer, LSB = ``pos``."""
        if width == 0:
            return 0
        if pos < 0 or pos + width > self._len:
            raise IndexError(f"bits [{pos}, {pos + width}) out of range [0, {self._len})")
        w, off = pos >> 6, pos & 63
        val = self._w[w] >> off
        if off + width > WORD:
            val |= self._w[w + 1] << (WORD - off)
        return val & ((1 << width) - 1)

    def count_ones(self) -> int:
        return sum(x.bit_count() for x in self._w)

    def to_numpy(self) -> np.ndarray:
        raw = self.words.astype("<u8").view(np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self._len]

    def to_string(self, group: int = 0) -> str:
        s = "".join(map(str, self.to_numpy().tolist()))
        if group:
            s = " ".join(s[i : i + group] for i in range(0, len(s), group))
        return s

    @property
    def size_bits(self) -> int:
        return self._len

    def to_bytes(self) -> bytes:
        return struct.pack("<Q", self._len) + self.words.astype("<u8").tobytes()

    @classmethod
    def read(cls, buf: bytes, pos: int) -> tuple["BitSeq", int]:
        if pos + 8 > len(buf):
            raise CorruptionError("truncated bit sequence header")
        (length,) = struct.unpack_from("<Q", buf, pos)
        pos += 8
        nwords = (length + WORD - 1) // WORD
        end = pos + 8 * nwords
        if end > len(buf):
            raise CorruptionError("truncated bit sequence body")
        words = np.frombuffer(buf, dtype="<u8", count=nwords, offset=pos).astype(np.uint64)
        return cls(words, length), end


def concat(*seqs: BitSeq) -> BitSeq:
    parts = [s.to_numpy() for s in seqs]
    return BitSeq.from_bits(np.concatenate(parts) if parts else np.zeros(0, np.uint8))


class RankIndex:
    """Rank/select support over a BitSeq.

    One absolute count per 512-bit superblock plus seven 9-bit relative
    word counts packed into a second 64-bit word: 128 bits per 512, i.e.
    25% overhead.
    """

    __slots__ = ("base", "_sb", "_sub", "_ones")

    def __init__(self, base: BitSeq):
        self.base = base
        words = base.words
        nsb = -(-len(words) // 8)
        padded = np.zeros(nsb * 8, dtype=np.uint64)
        padded[: len(words)] = words
        pc = _popcount64(padded).reshape(nsb, 8).astype(np.int64)
        within = np.cumsum(pc, axis=1) - pc  # ones before each word inside its superblock
        sb = np.concatenate([[0], np.cumsum(pc.sum(axis=1))[:-1]])
        sub = np.zeros(nsb, dtype=np.uint64)
        for j in range(1, 8):
            sub |= within[:, j].astype(np.uint64) << np.uint64(9 * (j - 1))
        self._sb = [int(x) for x in sb]
        self._sub = [int(x) for x in sub]
        self._ones = int(pc.sum())

    @property
    def ones(self) -> int:
        return self._ones

    @property
    def overhead_bits(self) -> int:
        return 128 * len(self._sb)

    def rank1(self, i: int) -> int:
        """Number of ones at positions strictly less than ``i``."""
        if not 0 <= i <= len(self.base):
            raise IndexError(f"rank position {i} out of range [0, {len(self.base)}]")
        return self._rank1(i)

    def _rank1(self, i: int) -> int:
        if i >= self.base._len:
            return self._ones
        w = i >> 6
        s = w >> 3
        j = w & 7
        r = self._sb[s]
        if j:
            r += (self._sub[s] >> (9 * (j - 1))) & 511
        off = i & 63
        if off:
            r += (self.base._w[w] & ((1 << off) - 1)).bit_count()
        return r

    def rank0(self, i: int) -> int:
        return i - self.rank1(i)

    def select1(self, j: int) -> int:
        """Position of the ``j``-th one (1-based), or -1 if there is none."""
        if not 1 <= j <= self._ones:
            return -1
        s = bisect_left(self._sb, j) - 1  # last superblock with fewer than j ones before it
        left = j - self._sb[s]
        w = s * 8
        ws = self.base._w
        while True:
            c = ws[w].bit_count()
            if c >= left:
                break
            left -= c
            w += 1
        x = ws[w]
        for _ in range(left - 1):
            x &= x - 1
        return w * WORD + ((x & -x).bit_length() - 1)


_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)


def _popcount64(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64)
    x = x - ((x >> np.uint64(1)) & _M1)
    x = (x & _M2) + ((x >> np.uint64(2)) & _M2)
    x = (x + (x >> np.uint64(4))) & _M4
    return (x * _H01) >> np.uint64(56)


class RankedBits:
    """A BitSeq bundled with its rank index."""

    __slots__ = ("bits", "index")

    def __init__(self, bits: BitSeq):
        self.bits = bits
        self.index = RankIndex(bits)

    def __len__(self):
        return len(self.bits)

    def __getitem__(self, i):
        return self.bits[i]

    def rank1(self, i: int) -> int:
        return self.index.rank1(i)

    def rank0(self, i: int) -> int:
        return self.index.rank0(i)

    def select1(self, j: int) -> int:
        return self.index.select1(j)


def rank1(s: RankedBits, i: int) -> int:
    return s.rank1(i)


def select1(s: RankedBits, j: int) -> int:
    return s.select1(j)


# -- variable-length unsigned integers ---------------------------------------


def encode_varuint(v: int) -> bytes:
    if not 0 <= v <= _U64:
        raise ValueError(f"varuint out of range: {v}")
    out = bytearray()
    while True:
        b = v & 0x7F
        v >>= 7
        if v:
            out.append(b | 0x80)
        else:
            out.append(b)
            return bytes(out)


def decode_varuint(buf, pos: int = 0) -> tuple[int, int]:
    """Decode one varuint at ``pos``; returns ``(value, next_pos)``."""
    v = 0
    shift = 0
    n = len(buf)
    while True:
        if pos >= n:
            raise MalformedEncoding("truncated varuint")
        b = buf[pos]
        pos += 1
        v |= (b & 0x7F) << shift
        if not b & 0x80:
            return v, pos
        shift += 7
        if shift > 63:
            raise MalformedEncoding("varuint longer than 64 bits")


def varuint_len(v: int) -> int:
    return max(1, (v.bit_length() + 6) // 7)


def varuint_roundtrip(v: int) -> int:
    value, _ = decode_varuint(encode_varuint(v))
    return value
