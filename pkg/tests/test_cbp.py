import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from k2df.bitseq import BitSeq
from k2df.errors import CorruptionError, StructureError
from k2df.k2bp import build_bp
from k2df.k2cbp import (
    CbpTree,
    PruneReport,
    build_cbp,
    decode_cbp,
    detect_identical,
    resolve_pointer,
    verify_lemma,
)
from k2df.matrix import CoordMatrix, DenseOracle, random_matrix
from k2df.parens import ParenSeq

from oracles import brute_detect, four_quadrants, random_balanced, same_subtree, tiled_matrix


def fig_quadrants(fig_matrix):
    q = CoordMatrix.from_dense(fig_matrix.to_dense()[:8, :8])
    return four_quadrants(q)


def nested_matrix(seed=0, vary_leaves=False):
    rng = np.random.default_rng(seed)
    x = rng.random((8, 8)) < 0.3
    y = rng.random((8, 8)) < 0.3
    q = np.zeros((16, 16), dtype=bool)
    q[:8, :8] = x
    q[:8, 8:] = x
    q[8:, :8] = y
    m = np.zeros((32, 32), dtype=bool)
    m[:16, :16] = q
    q2 = q.copy()
    if vary_leaves:
        # same shape, different leaf bits: swap the two cells of one occupied 2x2 block
        r, c = np.argwhere(q2[8:, :8])[0]
        r, c = r + 8 - r % 2, c - c % 2
        q2[r : r + 2, c : c + 2] = q2[r : r + 2, c : c + 2][::-1, ::-1]
    m[:16, 16:] = q2
    return CoordMatrix.from_dense(m)


def test_empty_report_when_no_repeats(fig_matrix):
    bp = build_bp(fig_matrix, 2)
    assert detect_identical(bp, 200).p == 0
    c = build_cbp(bp, PruneReport())
    assert c.B == bp.B and c.p == 0 and c.Sc.count_ones() == 0
    assert len(c.Sc) == bp.pat.count


def test_min_span_precondition(fig_matrix):
    with pytest.raises(ValueError):
        detect_identical(build_bp(fig_matrix, 2), 4)


def test_four_quadrants(fig_matrix):
    m = fig_quadrants(fig_matrix)
    bp = build_bp(m, 2)
    r = detect_identical(bp, 6)
    assert r.p == 3
    first = 1  # the first quadrant's subtree opens right after the root
    assert all(ref == first for _, ref, _ in r)
    assert r.entries == brute_detect(bp.B.to_string(), 6)
    span = r.entries[0][2]
    c = build_cbp(bp, r)
    assert len(c.B) == len(bp.B) - 3 * (span - 4)
    ptrs = c.pointer_positions().tolist()
    assert all(resolve_pointer(c, p)[0] == c.Tar[0] for p in ptrs)
    assert decode_cbp(c) == m


def test_example_pruning(fig_matrix):
    bp = build_bp(fig_matrix, 2)
    r = detect_identical(bp, 6)
    assert r.entries == brute_detect(bp.B.to_string(), 6)
    assert r.p == 2
    c = build_cbp(bp, r)
    assert len(c.Tar) == 2 and c.Sc.count_ones() == 2
    # first and fourth quadrants share a shape but not their leaves
    dense = fig_matrix.to_dense()
    (s, ref, span) = r.entries[1]
    assert same_subtree(bp.B.to_string(), s, ref)
    assert not np.array_equal(dense[:8, :8], dense[8:, 8:])
    assert decode_cbp(c) == fig_matrix
    o = DenseOracle.from_matrix(fig_matrix)
    assert all(c.get_cell(i, j) == o[i, j] for i in range(16) for j in range(16))


def test_resolve_pointer_bases(fig_matrix):
    for m in (fig_matrix, fig_quadrants(fig_matrix), nested_matrix()):
        bp = build_bp(m, 2)
        c = build_cbp(bp, detect_identical(bp, 6))
        sc = c.Sc.to_numpy()
        occ = np.flatnonzero(c.pat.marks.to_numpy())
        for v, p in enumerate(c.pointer_positions().tolist()):
            r = int(np.searchsorted(occ, p))
            zeros_before = int((sc[:r] == 0).sum())
            ref, base = resolve_pointer(c, p)
            assert ref == c.Tar[v]
            assert base == zeros_before + sum(c.leafCounts[:v])
        if c.p:
            assert resolve_pointer(c, int(c.pointer_positions()[0]))[0] == c.Tar[0]
        plain = [int(x) for x in occ[sc == 0]]
        if plain:
            with pytest.raises(StructureError):
                resolve_pointer(c, plain[0])
        with pytest.raises(StructureError):
            resolve_pointer(c, 0)


@pytest.mark.parametrize("vary", [False, True])
def test_nested_pointer(vary):
    m = nested_matrix(3, vary)
    bp = build_bp(m, 2)
    r = detect_identical(bp, 6)
    c = build_cbp(bp, r)
    # some pointer lies inside the region of another pointer's reference
    regions = [(t, c.B.find_close(t)) for t in c.Tar]
    ptrs = c.pointer_positions().tolist()
    assert any(a < p < b for p in ptrs for a, b in regions)
    assert c.expand() == bp.B
    assert decode_cbp(c) == m
    o = DenseOracle.from_matrix(m)
    assert all(c.get_cell(i, j) == o[i, j] for i in range(32) for j in range(32))


def test_verify_lemma_examples():
    assert verify_lemma(ParenSeq.from_string("(())(())"), 0, 4)
    assert not verify_lemma(ParenSeq.from_string("(()())(())"), 0, 6)
    p = ParenSeq.from_string("((())(()))")
    assert verify_lemma(p, 2, 2)
    assert verify_lemma(p, 1, 5)
    with pytest.raises(ValueError):
        verify_lemma(p, 4, 1)


def test_lemma_agrees_on_random_pairs():
    rng = random.Random(4)
    for _ in range(30):
        p = ParenSeq.from_string(random_balanced(rng.randint(5, 60), rng))
        opens = [i for i in range(len(p)) if p.is_open(i)]
        for _ in range(20):
            verify_lemma(p, rng.choice(opens), rng.choice(opens))  # asserts internal agreement


def test_overlapping_report_rejected(fig_matrix):
    bp = build_bp(fig_matrix, 2)
    good = detect_identical(bp, 6).entries
    s, ref, span = good[0]
    with pytest.raises(StructureError):
        build_cbp(bp, PruneReport(good + [(s + 1, ref + 1, 4)]))
    with pytest.raises(StructureError):
        build_cbp(bp, PruneReport([(ref, s, span)]))  # reference after the pruned copy
    with pytest.raises(StructureError):
        build_cbp(bp, PruneReport([(1, 0, 34)]))  # not a matching subtree pair


def check_matrix(m, min_span):
    bp = build_bp(m, 2)
    s = bp.B.to_string()
    r = detect_identical(bp, min_span)
    assert r.entries == brute_detect(s, min_span)
    ends = [a + ln for a, _, ln in r]
    assert all(e <= a for e, (a, _, _) in zip(ends, r.entries[1:]))
    for a, ref, _ in r:
        assert ref < a and verify_lemma(bp.B, a, ref)
    c = build_cbp(bp, r)
    assert c.expand() == bp.B
    assert len(c.B) < len(bp.B) if r.p else c.B == bp.B
    assert decode_cbp(c) == m
    return c


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 64), st.floats(0, 0.6), st.integers(0, 10**6), st.sampled_from([6, 8, 12, 20, 64]))
def test_detector_matches_oracle(n, d, seed, min_span):
    check_matrix(random_matrix(n, d, seed), min_span)


@pytest.mark.parametrize("seed", range(6))
def test_detector_on_tiled(seed):
    m = tiled_matrix(64, [4, 8, 16][seed % 3], 2, 0.4, seed, noise=0.2 if seed % 2 else 0.0)
    c = check_matrix(m, 6)
    assert c.p > 0


def test_corrupt_leaf_counts(fig_matrix):
    bp = build_bp(fig_matrix, 2)
    c = build_cbp(bp, detect_identical(bp, 6))
    lc = list(c.leafCounts)
    lc[0] += 1
    lc[1] -= 1
    bad = CbpTree(c.k, c.n, c.h, c.B, c.L2, c.Sc, c.Tar, lc)
    with pytest.raises(CorruptionError):
        bad.table()
    with pytest.raises(CorruptionError):
        CbpTree(c.k, c.n, c.h, c.B, c.L2, c.Sc, c.Tar, [1, 1])
    with pytest.raises(CorruptionError):
        CbpTree(c.k, c.n, c.h, c.B, c.L2, BitSeq.from_string("0" * len(c.Sc)), c.Tar, c.leafCounts)


def test_serialization(fig_matrix):
    bp = build_bp(fig_matrix, 2)
    c = build_cbp(bp, detect_identical(bp, 6))
    back = CbpTree.from_bytes(c.to_bytes())
    assert back.B == c.B and back.Tar == c.Tar and back.leafCounts == c.leafCounts
    assert back.decode() == fig_matrix
