import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from k2df.bitseq import BitSeq
from k2df.parens import BLOCK, ParenSeq, PatternIndex, find_close, find_open, rank_pattern

from oracles import naive_pattern_rank, random_balanced, stack_matches


def P(s):
    return ParenSeq.from_string(s)


def test_find_close_examples():
    assert find_close(P("(())"), 0) == 3
    assert find_close(P("(())"), 1) == 2
    assert find_close(P("((())(()))"), 0) == 9


def test_find_open_examples():
    assert find_open(P("(())"), 3) == 0
    assert find_open(P("(())"), 2) == 1
    assert find_open(P("((())(()))"), 8) == 5


def test_precondition_errors():
    p = P("(())")
    with pytest.raises(ValueError):
        p.find_close(2)
    with pytest.raises(ValueError):
        p.find_open(0)
    with pytest.raises(IndexError):
        p.find_close(4)


def test_unbalanced_rejected():
    for s in ("(", ")(", "(()", "())("):
        with pytest.raises(ValueError):
            P(s)


def test_rank_pattern_examples():
    p = P("(())")
    assert rank_pattern(p, PatternIndex(p), 4) == 1
    q = P("((())(()))")
    assert rank_pattern(q, PatternIndex(q), 10) == 2
    assert rank_pattern(q, PatternIndex(q), 0) == 0
    with pytest.raises(IndexError):
        rank_pattern(q, PatternIndex(q), 11)


def check_all(s: str):
    p = P(s)
    match = stack_matches(s)
    for o, c in match.items():
        assert p.find_close(o) == c
        assert p.find_open(c) == o
    idx = PatternIndex(p)
    for i in range(len(s) + 1):
        assert idx.rank(i) == naive_pattern_rank(s, i)


@pytest.mark.parametrize("pairs", [1, 2, 5, 31, 64, 127, 128, 129, 200, 256])
def test_exhaustive_small(pairs):
    rng = random.Random(pairs)
    for _ in range(5):
        check_all(random_balanced(pairs, rng))


def test_deep_and_flat():
    check_all("(" * 256 + ")" * 256)
    check_all("()" * 256)
    check_all("(" + "(())" * 100 + ")")


def test_large_sampled():
    rng = random.Random(11)
    s = random_balanced(50_000, rng)
    p = P(s)
    match = stack_matches(s)
    opens = list(match)
    for o in rng.sample(opens, 3000):
        c = match[o]
        assert p.find_close(o) == c
        assert p.find_open(c) == o
    # long-range matches cross many blocks
    deep = "(" * 40_000 + ")" * 40_000
    q = P(deep)
    assert q.find_close(0) == len(deep) - 1
    assert q.find_open(len(deep) - 1) == 0
    assert q.find_close(123) == len(deep) - 124
    idx = PatternIndex(p)
    marks = [1 if s[i : i + 4] == "(())" else 0 for i in range(len(s))]
    pref = np.concatenate([[0], np.cumsum(marks)])
    for i in rng.sample(range(len(s) + 1), 3000):
        assert idx.rank(i) == pref[i]


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 300), st.integers(0, 2**32))
def test_roundtrip_property(pairs, seed):
    s = random_balanced(pairs, random.Random(seed))
    p = P(s)
    for i, ch in enumerate(s):
        if ch == "(":
            assert p.find_open(p.find_close(i)) == i


def test_pattern_never_overlaps():
    s = random_balanced(5000, random.Random(2))
    starts = [i for i in range(len(s)) if s[i : i + 4] == "(())"]
    assert all(b - a >= 2 for a, b in zip(starts, starts[1:]))
    assert PatternIndex(P(s)).count == len(starts)


def test_overhead_is_sublinear_per_block():
    p = ParenSeq(BitSeq.from_bits([1] * 5000 + [0] * 5000))
    assert p.overhead_bits <= 64 * (-(-10000 // BLOCK)) + 64
