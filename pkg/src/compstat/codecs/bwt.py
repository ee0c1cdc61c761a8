"""Burrows-Wheeler transform + move-to-front + adaptive order-0 coding of ranks."""
from __future__ import annotations

import math

import numpy as np


def suffix_array(text) -> np.ndarray:
    """Suffix array by prefix doubling (O(n log^2 n)), suffixes compared with end-of-text smallest."""
    t = np.asarray(text, dtype=np.int64)
    n = t.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    rank = t - t.min()
    step = 1
    while True:
        second = np.full(n, -1, dtype=np.int64)
        if step < n:
            second[: n - step] = rank[step:]
        sa = np.lexsort((second, rank))
        r, s = rank[sa], second[sa]
        changed = np.empty(n, dtype=np.int64)
        changed[0] = 0
        changed[1:] = (r[1:] != r[:-1]) | (s[1:] != s[:-1])
        new_rank = np.empty(n, dtype=np.int64)
        new_rank[sa] = np.cumsum(changed)
        rank = new_rank
        if rank.max() == n - 1 or step >= n:
            return sa
        step *= 2


def bwt(data) -> tuple[np.ndarray, int]:
    """BWT of ``data`` followed by an end marker.

    Returns the last column with the marker removed, and the marker's row.
    """
    t = np.asarray(data, dtype=np.int64)
    n = t.shape[0]
    sa = suffix_array(np.append(t + 1, 0))
    last = np.where(sa == 0, -1, np.append(t, -1)[sa - 1])
    primary = int(np.flatnonzero(last == -1)[0])
    return last[last != -1], primary


def move_to_front(data, alphabet_size: int) -> list[int]:
    table = list(range(alphabet_size))
    ranks = []
    for a in np.asarray(data).tolist():
        r = table.index(a)
        ranks.append(r)
        if r:
            del table[r]
            table.insert(0, a)
    return ranks


def code_bits(data, alphabet_size: int, block_size: int | None = None) -> float:
    """Ideal code length of ``data``: per-block BWT, MTF and a KT-estimated rank coder.

    MTF table and rank counts carry over between blocks; each block also
    pays ``log2(len(block)+1)`` bits for the marker row.
    """
    data = np.asarray(data)
    n = data.shape[0]
    block = n if not block_size else int(block_size)
    table = list(range(alphabet_size))
    counts = [0.5] * alphabet_size
    total = alphabet_size / 2
    terms = []
    for start in range(0, n, block):
        chunk = data[start:start + block]
        last, _ = bwt(chunk)
        terms.append(math.log2(chunk.shape[0] + 1))
        for a in last.tolist():
            r = table.index(a)
            if r:
                del table[r]
                table.insert(0, a)
            terms.append(-math.log2(counts[r] / total))
            counts[r] += 1
            total += 1
    return math.fsum(terms)
