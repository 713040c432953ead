"""Brute-force reference implementations used only by the tests."""

from __future__ import annotations

import random

import numpy as np

from k2df.matrix import CoordMatrix


def naive_rank1(bits, i):
    return sum(bits[:i])


def naive_select1(bits, j):
    seen = 0
    for p, b in enumerate(bits):
        seen += b
        if b and seen == j:
            return p
    return -1


def stack_matches(s: str) -> dict[int, int]:
    """open position -> close position, by an explicit stack."""
    st, out = [], {}
    for i, ch in enumerate(s):
        if ch == "(":
            st.append(i)
        else:
            out[st.pop()] = i
    assert not st
    return out


def naive_pattern_rank(s: str, i: int) -> int:
    return sum(1 for p in range(i) if s[p : p + 4] == "(())")


def brute_suffix(codes):
    codes = list(codes)
    n = len(codes)
    sa = sorted(range(n), key=lambda i: codes[i:])

    def lcp(a, b):
        m = 0
        while a + m < n and b + m < n and codes[a + m] == codes[b + m]:
            m += 1
        return m

    return sa, [0] + [lcp(sa[i - 1], sa[i]) for i in range(1, n)]


def random_balanced(n_pairs: int, rng: random.Random) -> str:
    """Uniform-ish random balanced string with ``n_pairs`` pairs."""
    out, opened, closed = [], 0, 0
    while closed < n_pairs:
        if opened < n_pairs and (opened == closed or rng.random() < 0.5):
            out.append("(")
            opened += 1
        else:
            out.append(")")
            closed += 1
    return "".join(out)


def brute_detect(s: str, min_span: int) -> list[tuple[int, int, int]]:
    """Greedy left-to-right maximal repeated subtrees by plain substring search."""
    match = stack_matches(s)
    out, i = [], 0
    while i < len(s):
        if s[i] == "(":
            c = match[i]
            span = c - i + 1
            if span > min_span:
                ref = s.find(s[i : c + 1])
                if ref < i:
                    out.append((i, ref, span))
                    i = c + 1
                    continue
        i += 1
    return out


def same_subtree(s: str, i: int, j: int) -> bool:
    """Recursive structural comparison of the subtrees opening at i and j."""
    match = stack_matches(s)

    def kids(x):
        out, q = [], x + 1
        while s[q] == "(":
            out.append(q)
            q = match[q] + 1
        return out

    def same(x, y):
        a, b = kids(x), kids(y)
        return len(a) == len(b) and all(same(p, q) for p, q in zip(a, b))

    return same(i, j)


def tiled_matrix(n: int, tile: int, patterns: int, density: float, seed: int, noise: float = 0.0) -> CoordMatrix:
    """n x n matrix assembled from ``patterns`` random tile x tile blocks, with
    optional per-tile bit flips so equal-shaped subtrees carry different leaves."""
    rng = np.random.default_rng(seed)
    blocks = [rng.random((tile, tile)) < density for _ in range(patterns)]
    dense = np.zeros((n, n), dtype=bool)
    for r in range(0, n, tile):
        for c in range(0, n, tile):
            b = blocks[rng.integers(patterns)].copy()
            if noise:
                flip = rng.random((tile, tile)) < noise
                b ^= flip & b  # only clear bits, shapes may still coincide
            dense[r : r + tile, c : c + tile] = b
    return CoordMatrix.from_dense(dense)


def four_quadrants(quadrant: CoordMatrix) -> CoordMatrix:
    q = quadrant.n
    rows = np.concatenate([quadrant.rows + dr for dr in (0, 0, q, q)])
    cols = np.concatenate([quadrant.cols + dc for dc in (0, q, 0, q)])
    return CoordMatrix(2 * q, rows, cols)
