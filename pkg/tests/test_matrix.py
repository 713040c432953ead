import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from k2df.errors import ParseError
from k2df.matrix import CoordMatrix, DenseOracle, dump_edgelist, load_edgelist, pad_shape, random_matrix


def load(text):
    return load_edgelist(io.StringIO(text))


def test_load_examples():
    m = load("2 1\n0 1\n")
    assert m.n == 2 and m.coords == [(0, 1)]
    assert load("2 2\n0 1\n0 1\n").nnz == 1
    m = load("4 3\n3 0\n1 2\n1 2\n")
    assert m.coords == [(1, 2), (3, 0)] and m.nnz == 2


def test_load_errors_carry_line_numbers():
    with pytest.raises(ParseError, match="line 3"):
        load("4 2\n0 1\n4 0\n")
    with pytest.raises(ParseError, match="line 2"):
        load("4 1\n0 x\n")
    with pytest.raises(ParseError, match="line 2"):
        load("4 1\n0 1 2\n")
    with pytest.raises(ParseError):
        load("")
    with pytest.raises(ParseError):
        load("4\n")
    with pytest.raises(ParseError, match="declares"):
        load("4 3\n0 1\n")


def test_matrix_market():
    text = "%%MatrixMarket matrix coordinate pattern general\n% comment\n3 3 2\n1 1\n3 2\n"
    assert load(text).coords == [(0, 0), (2, 1)]
    with pytest.raises(ParseError):
        load("%%MatrixMarket matrix coordinate pattern general\n3 4 0\n")
    with pytest.raises(ParseError):
        load("%%MatrixMarket matrix array real general\n3 3\n")


def test_dump_roundtrip():
    m = random_matrix(50, 0.05, 4)
    buf = io.StringIO()
    dump_edgelist(m, buf)
    assert load(buf.getvalue()) == m


@pytest.mark.parametrize("n,k,h,side", [(16, 2, 4, 16), (1000, 2, 10, 1024), (1, 2, 0, 1), (2, 2, 1, 2),
                                        (17, 2, 5, 32), (10, 3, 3, 27), (16, 4, 2, 16)])
def test_pad_shape(n, k, h, side):
    s = pad_shape(n, k)
    assert (s.k, s.h, s.side) == (k, h, side)
    if n > 1:
        assert k ** (h - 1) < n <= k**h


def test_pad_shape_errors():
    with pytest.raises(ValueError):
        pad_shape(4, 1)
    with pytest.raises(ValueError):
        pad_shape(0, 2)


def test_random_matrix_counts():
    assert random_matrix(1000, 1e-4, 1).nnz == 100
    assert random_matrix(1000, 0.2, 1).nnz == 200_000
    assert random_matrix(30, 0.0, 1).nnz == 0
    assert random_matrix(30, 1.0, 1).nnz == 900
    assert random_matrix(30, 0.7, 2).nnz == 630
    with pytest.raises(ValueError):
        random_matrix(10, 1.5, 0)


def test_random_matrix_reproducible():
    a, b, c = random_matrix(200, 0.01, 9), random_matrix(200, 0.01, 9), random_matrix(200, 0.01, 10)
    assert a == b and a != c


def test_random_matrix_roughly_uniform():
    m = random_matrix(400, 0.05, 5)
    counts = np.bincount(m.rows // 100, minlength=4)
    assert counts.min() > 0.8 * counts.mean()


def test_coord_matrix_invariants():
    m = CoordMatrix(5, [3, 0, 3, 1], [1, 4, 1, 0])
    assert m.coords == [(0, 4), (1, 0), (3, 1)]
    with pytest.raises(ValueError):
        CoordMatrix(3, [3], [0])
    with pytest.raises(ValueError):
        CoordMatrix(0)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 64), st.floats(0, 1), st.integers(0, 1000))
def test_dense_oracle_agrees(n, d, seed):
    m = random_matrix(n, d, seed)
    o = DenseOracle.from_matrix(m)
    cells = set(m.coords)
    for r in range(n):
        for c in range(n):
            assert o[r, c] == ((r, c) in cells)
    assert o.to_matrix() == m
