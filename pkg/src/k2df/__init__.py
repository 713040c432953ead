"""k^2-tree representations of sparse boolean matrices: level-order bitmaps,
depth-first blocks (plain and with skip records), balanced parentheses, and
balanced parentheses with repeated subtrees shared, plus boolean products."""

from .base import BlockTable, BuildBuffer, K2Tree
from .boolmul import multiply, square, union
from .errors import (
    CorruptionError,
    DimensionError,
    K2Error,
    MalformedEncoding,
    NavigationError,
    ParseError,
    StructureError,
)
from .k2bp import BpTree
from .k2canon import CanonicalTree
from .k2cbp import CbpTree, PruneReport, detect_identical
from .k2edf import EdfTree
from .k2pdf import DfTree
from .matrix import CoordMatrix, random_matrix
from .reps import build, convert, load, loads, save

__all__ = [
    "BlockTable", "BuildBuffer", "K2Tree", "multiply", "square", "union",
    "CorruptionError", "DimensionError", "K2Error", "MalformedEncoding",
    "NavigationError", "ParseError", "StructureError", "BpTree", "CanonicalTree",
    "CbpTree", "PruneReport", "detect_identical", "EdfTree", "DfTree",
    "CoordMatrix", "random_matrix", "build", "convert", "load", "loads", "save",
]
__version__ = "0.1.0"
