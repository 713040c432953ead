import itertools

import pytest

from k2df.errors import CorruptionError
from k2df.matrix import CoordMatrix, random_matrix
from k2df.reps import NAMES, build, convert, load, loads, save


@pytest.mark.parametrize("src,dst", list(itertools.permutations(NAMES, 2)))
def test_convert_preserves_matrix(src, dst, fig_matrix):
    for m in (fig_matrix, random_matrix(70, 0.04, 3), CoordMatrix(9)):
        t = convert(build(src, m), dst)
        assert t.name == dst and t.decode() == m


@pytest.mark.parametrize("rep", NAMES)
def test_bytes_roundtrip(rep, tmp_path):
    for m in (CoordMatrix(1), CoordMatrix(1, [0], [0]), CoordMatrix(5), random_matrix(100, 0.02, 8)):
        t = build(rep, m)
        back = loads(t.to_bytes())
        assert type(back) is type(t) and back.decode() == m
        assert back.size_bits() == t.size_bits()
        path = tmp_path / f"m.{rep}"
        save(t, path)
        assert load(path).decode() == m


@pytest.mark.parametrize("rep", NAMES)
def test_corruption_detected(rep):
    buf = bytearray(build(rep, random_matrix(40, 0.05, 2)).to_bytes())
    flipped = bytearray(buf)
    flipped[len(buf) // 2] ^= 0x10
    with pytest.raises(CorruptionError):
        loads(bytes(flipped))
    with pytest.raises(CorruptionError):
        loads(bytes(buf[:-5]))
    with pytest.raises(CorruptionError):
        loads(b"nope" + bytes(buf[4:]))


def test_unknown_rep():
    with pytest.raises(ValueError):
        build("dfuds", CoordMatrix(4))


def test_header_layout():
    buf = build("bp", CoordMatrix(1000, [1], [2])).to_bytes()
    assert buf[:4] == b"K2DF"
    assert buf[5] == 0x04 and buf[6] == 2
    assert int.from_bytes(buf[7:15], "little") == 1000 and buf[15] == 10
    tags = {rep: build(rep, CoordMatrix(4)).to_bytes()[5] for rep in NAMES}
    assert tags == {"canon": 1, "pdf": 2, "edf": 3, "bp": 4, "cbp": 5}
