"""The 16x16 worked example used throughout the tests and docs."""

from __future__ import annotations

EXAMPLE_T = "1111 1001 0100 0100 1001 1101 1000 1100 1100 1101 1000"
EXAMPLE_L = "0100 1100 0100 1000 1000 1000 1000 0100 1010 1111 1000 0100"


def example_tree():
    from .bitseq import BitSeq
    from .k2canon import CanonicalTree

    return CanonicalTree(2, 16, 4, BitSeq.from_string(EXAMPLE_T), BitSeq.from_string(EXAMPLE_L))


def example_matrix():
    return example_tree().decode()
