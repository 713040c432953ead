"""Registry of the five representations: build, convert, load by tag."""

from __future__ import annotations

from pathlib import Path

from .base import MAGIC, BlockTable, K2Tree, parse_header
from .errors import CorruptionError
from .k2bp import BpTree
from .k2canon import CanonicalTree
from .k2cbp import DEFAULT_MIN_SPAN, CbpTree
from .k2edf import EdfTree
from .k2pdf import DfTree
from .matrix import CoordMatrix

REPS: dict[str, type[K2Tree]] = {
    "canon": CanonicalTree,
    "pdf": DfTree,
    "edf": EdfTree,
    "bp": BpTree,
    "cbp": CbpTree,
}
BY_TAG = {cls.TAG: cls for cls in REPS.values()}
NAMES = tuple(REPS)


def rep_class(rep: str) -> type[K2Tree]:
    try:
        return REPS[rep]
    except KeyError:
        raise ValueError(f"unknown representation {rep!r}; expected one of {', '.join(NAMES)}") from None


def from_table(rep: str, table: BlockTable, tau=None, min_span: int = DEFAULT_MIN_SPAN) -> K2Tree:
    cls = rep_class(rep)
    if cls is EdfTree:
        return EdfTree.from_table(table, tau)
    if cls is CbpTree:
        return CbpTree.from_table(table, min_span)
    return cls.from_table(table)


def build(rep: str, m: CoordMatrix, k: int = 2, **opts) -> K2Tree:
    return from_table(rep, BlockTable.from_matrix(m, k), **opts)


def convert(t: K2Tree, rep: str, **opts) -> K2Tree:
    return from_table(rep, t.table(), **opts)


def loads(buf: bytes, **opts) -> K2Tree:
    if len(buf) < len(MAGIC) + 2 or buf[: len(MAGIC)] != MAGIC:
        raise CorruptionError("not a k2 tree file (bad magic)")
    tag = parse_header(buf)[0]
    cls = BY_TAG.get(tag)
    if cls is None:
        raise CorruptionError(f"unknown representation tag {tag:#04x}")
    if cls is CbpTree and "min_span" in opts:
        return CbpTree.from_bytes(buf, opts["min_span"])
    return cls.from_bytes(buf)


def load(path, **opts) -> K2Tree:
    return loads(Path(path).read_bytes(), **opts)


def save(t: K2Tree, path) -> None:
    Path(path).write_bytes(t.to_bytes())
