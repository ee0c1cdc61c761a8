"""LZ78 incremental parsing, with two ways of charging bits.

``sequential``
    The parse tree read as a sequential probability model: at a tree node
    with ``s`` nodes in its subtree there are ``s*(|A|-1) + 1`` ways to
    finish the current phrase, and the next symbol is predicted by the share
    of those that go through it.  Multiplied along a phrase this gives each
    new phrase probability ``1 / (t*(|A|-1) + 1)`` where ``t`` is the
    dictionary size, and every symbol costs strictly positive bits.

``phrase``
    Integer pointer+symbol bits: phrase ``t`` (1-indexed) costs
    ``ceil(log2 t) + ceil(log2 |A|)``; an unfinished final phrase costs its
    pointer only.
"""
from __future__ import annotations

import math

import numpy as np


class LZ78Model:
    """Sequential LZ78 predictor; ``feed`` returns bits per symbol."""

    def __init__(self, alphabet_size: int):
        self.A = alphabet_size
        self.children: dict[tuple[int, int], int] = {}
        self.size = [1]          # subtree node counts; node 0 is the root
        self.path = [0]          # nodes visited by the phrase in progress

    def copy(self) -> "LZ78Model":
        new = LZ78Model(self.A)
        new.children = dict(self.children)
        new.size = list(self.size)
        new.path = list(self.path)
        return new

    def feed(self, data) -> np.ndarray:
        A1 = self.A - 1
        children, size, path = self.children, self.size, self.path
        out = np.empty(len(data), dtype=np.float64)
        for i, a in enumerate(np.asarray(data).tolist()):
            node = path[-1]
            leaves = size[node] * A1 + 1
            child = children.get((node, a))
            if child is not None:
                out[i] = math.log2(leaves / (size[child] * A1 + 1))
                path.append(child)
                continue
            out[i] = math.log2(leaves)
            children[(node, a)] = len(size)
            size.append(1)
            for v in path:
                size[v] += 1
            del path[1:]
        return out


def phrase_bits(data, alphabet_size: int) -> int:
    """Total integer bit count of the pointer+symbol LZ78 encoding."""
    symbol_bits = math.ceil(math.log2(alphabet_size))
    dictionary: dict[tuple[int, int], int] = {}
    node = 0
    t = 1
    total = 0
    for a in np.asarray(data).tolist():
        nxt = dictionary.get((node, a))
        if nxt is not None:
            node = nxt
            continue
        total += math.ceil(math.log2(t)) + symbol_bits
        dictionary[(node, a)] = t
        t += 1
        node = 0
    if node != 0:
        total += math.ceil(math.log2(t))
    return total
