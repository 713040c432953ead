"""Suffix array, inverse suffix array and LCP array over parenthesis sequences."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .parens import ParenSeq


@dataclass(frozen=True)
class SuffixIndex:
    sa: np.ndarray
    isa: np.ndarray
    lcp: np.ndarray

    def __len__(self):
        return len(self.sa)


def paren_codes(p: ParenSeq) -> np.ndarray:
    """``(`` -> 1, ``)`` -> 2; the end-of-string sentinel is an implicit 0."""
    return (2 - p.bits.to_numpy()).astype(np.int64)


PACK = 31  # symbols per int64 key, 2 bits each


def packed_keys(codes) -> np.ndarray:
    """key[i] = codes[i : i + PACK] packed big-end first, sentinel 0 past the end."""
    c = np.asarray(codes, dtype=np.int64)
    n = c.size
    padded = np.concatenate([c, np.zeros(PACK, dtype=np.int64)])
    key = np.zeros(n, dtype=np.int64)
    for t in range(PACK):
        key = (key << 2) | padded[t : t + n]
    return key


def _dense_ranks(sorted_keys: np.ndarray) -> np.ndarray:
    return np.concatenate([[1], (np.diff(sorted_keys) != 0).astype(np.int64)]).cumsum()


def suffix_array(codes) -> np.ndarray:
    """Prefix doubling, seeded with ranks of packed PACK-symbol prefixes."""
    codes = np.asarray(codes, dtype=np.int64)
    n = codes.size
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    key = packed_keys(codes)
    sa = np.argsort(key, kind="stable")
    new = _dense_ranks(key[sa])
    rank = np.empty(n, dtype=np.int64)
    rank[sa] = new
    k = PACK
    while new[-1] < n:
        second = np.zeros(n, dtype=np.int64)
        if k < n:
            second[: n - k] = rank[k:]
        key = rank * (n + 1) + second
        sa = np.argsort(key, kind="stable")
        new = _dense_ranks(key[sa])
        rank[sa] = new
        k *= 2
    return sa.astype(np.int64)


def _bit_length(x: np.ndarray) -> np.ndarray:
    out = np.zeros(x.shape, dtype=np.int64)
    x = x.copy()
    for s in (32, 16, 8, 4, 2, 1):
        hi = (x >> s) != 0
        out[hi] += s
        x[hi] >>= s
    return out + (x != 0)


VECTOR_ROUNDS = 8


def lcp_array(codes, sa: np.ndarray) -> np.ndarray:
    """Permuted-LCP method: PLCP[i] = lcp(i, Phi[i]) in text order, then
    LCP = PLCP[SA].

    Short PLCP values are resolved word-parallel, PACK symbols per round.
    The rest are finished by the sequential scan, which starts each position
    from PLCP[i-1] - 1 and so stays linear on repetitive input.
    """
    n = len(sa)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    key = np.concatenate([packed_keys(codes), [0]])
    phi = np.empty(n, dtype=np.int64)
    phi[sa[0]] = -1
    phi[sa[1:]] = sa[:-1]
    plcp = np.zeros(n, dtype=np.int64)
    i = np.flatnonzero(phi >= 0)
    j = phi[i]
    l = np.zeros(i.size, dtype=np.int64)
    for _ in range(VECTOR_ROUNDS):
        if not i.size:
            break
        a = key[np.minimum(i + l, n)]
        b = key[np.minimum(j + l, n)]
        eq = a == b
        done = ~eq
        diff = a[done] ^ b[done]
        plcp[i[done]] = l[done] + (2 * PACK - _bit_length(diff)) // 2
        i, j, l = i[eq], j[eq], l[eq] + PACK
    if i.size:
        text = np.asarray(codes, dtype=np.uint8).tobytes()
        pl = plcp.tolist()
        floor = VECTOR_ROUNDS * PACK
        for x, y in zip(i.tolist(), j.tolist()):
            m = pl[x - 1] - 1 if x else 0
            if m < floor:
                m = floor
            lim = n - (x if x > y else y)
            # gallop while equal, then binary search the mismatch in [m, hi)
            step, hi = 1, -1
            while m < lim:
                st = step if step < lim - m else lim - m
                if text[x + m : x + m + st] == text[y + m : y + m + st]:
                    m += st
                    step *= 2
                else:
                    hi = m + st
                    break
            while hi - m > 1:
                st = (hi - m) // 2
                if text[x + m : x + m + st] == text[y + m : y + m + st]:
                    m += st
                else:
                    hi = m + st
            pl[x] = m
        plcp = np.asarray(pl, dtype=np.int64)
    lcp = plcp[sa]
    lcp[0] = 0
    return lcp


def build_suffix_index(p) -> SuffixIndex:
    codes = paren_codes(p) if isinstance(p, ParenSeq) else np.asarray(p, dtype=np.int64)
    sa = suffix_array(codes)
    isa = np.empty_like(sa)
    isa[sa] = np.arange(sa.size, dtype=np.int64)
    return SuffixIndex(sa, isa, lcp_array(codes, sa))
