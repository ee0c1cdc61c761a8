"""PPM context model with ideal (arithmetic-coding) code lengths.

The model predicts each symbol from the longest matching context of order
``<= k``, escaping to shorter contexts with full exclusion and finally to a
uniform distribution over the symbols not yet excluded.  A context that
already holds every non-excluded symbol reserves no escape mass.  Every symbol thus
gets a strictly positive probability and, for a fixed length ``n``, the
induced probabilities over ``A^n`` sum to one.

Counts live in open-addressing hash tables stored in flat numpy arrays so the
whole model can be advanced by a numba kernel and snapshotted with ``copy``.
"""
from __future__ import annotations

import math

import numba
import numpy as np

from compstat.errors import DomainError

ESCAPE_METHODS = {"A": 0, "C": 1, "D": 2}

_EMPTY = -1
_GOLDEN = np.uint64(11400714819323198485)


@numba.njit(inline="always")
def _slot(key, mask):
    h = np.uint64(key) * _GOLDEN
    return np.int64((h >> np.uint64(29)) & np.uint64(mask))


@numba.njit(inline="always")
def _lookup(keys, ids, key):
    mask = keys.shape[0] - 1
    i = _slot(key, mask)
    while keys[i] != _EMPTY:
        if keys[i] == key:
            return ids[i]
        i = (i + 1) & mask
    return -1


@numba.njit(inline="always")
def _insert(keys, ids, key, value):
    mask = keys.shape[0] - 1
    i = _slot(key, mask)
    while keys[i] != _EMPTY:
        i = (i + 1) & mask
    keys[i] = key
    ids[i] = value


@numba.njit(cache=True, nogil=True)
def _rehash(old_keys, old_ids, new_keys, new_ids):
    for i in range(old_keys.shape[0]):
        if old_keys[i] != _EMPTY:
            _insert(new_keys, new_ids, old_keys[i], old_ids[i])


@numba.njit(cache=True, nogil=True)
def _feed(seq, start, out, k, A, method, hist, meta,
          ctx_keys, ctx_ids, ctx_tot, ctx_dist, ctx_head,
          sym_keys, sym_ids, ent_cnt, ent_sym, ent_next,
          excl_mask, excl_list):
    """Advance the model over ``seq[start:]``, writing bits per symbol to ``out``.

    Returns the index where it stopped; less than ``len(seq)`` means a table
    needs to grow before continuing.
    """
    kp1 = k + 1
    cvs = np.zeros(kp1, dtype=np.int64)
    cids = np.zeros(kp1, dtype=np.int64)
    n = seq.shape[0]
    i = start
    while i < n:
        nhist = meta[0]
        n_ctx = meta[1]
        n_ent = meta[2]
        top = k if nhist > k else nhist
        if (n_ctx + top + 1 > ctx_tot.shape[0]
                or 2 * (n_ctx + top + 1) > ctx_keys.shape[0]
                or n_ent + top + 1 > ent_cnt.shape[0]
                or 2 * (n_ent + top + 1) > sym_keys.shape[0]):
            return i
        a = seq[i]

        cv = 0
        mult = 1
        cvs[0] = 0
        for j in range(1, top + 1):
            cv += hist[j - 1] * mult
            mult *= A
            cvs[j] = cv
        for j in range(top + 1):
            cids[j] = _lookup(ctx_keys, ctx_ids, cvs[j] * kp1 + j)

        cost = 0.0
        nex = 0
        coded = False
        for j in range(top, -1, -1):
            cid = cids[j]
            if cid < 0:
                continue
            tot = ctx_tot[cid]
            q = ctx_dist[cid]
            for t in range(nex):
                eid = _lookup(sym_keys, sym_ids, cid * A + excl_list[t])
                if eid >= 0:
                    tot -= ent_cnt[eid]
                    q -= 1
            if q == 0:
                continue
            eid = _lookup(sym_keys, sym_ids, cid * A + a)
            if eid >= 0:
                c = ent_cnt[eid]
                if q == A - nex:
                    # every remaining symbol is in this context: escape is impossible
                    p = c / tot
                elif method == 0:
                    p = c / (tot + 1.0)
                elif method == 1:
                    p = c / (tot + q)
                else:
                    p = (c - 0.5) / tot
                cost -= math.log2(p)
                coded = True
                break
            if method == 0:
                pe = 1.0 / (tot + 1.0)
            elif method == 1:
                pe = q / (tot + q)
            else:
                pe = q / (2.0 * tot)
            cost -= math.log2(pe)
            e = ctx_head[cid]
            while e >= 0:
                s = ent_sym[e]
                if not excl_mask[s]:
                    excl_mask[s] = True
                    excl_list[nex] = s
                    nex += 1
                e = ent_next[e]
        if not coded:
            cost += math.log2(A - nex)
        for t in range(nex):
            excl_mask[excl_list[t]] = False
        out[i] = cost

        for j in range(top + 1):
            cid = cids[j]
            if cid < 0:
                cid = n_ctx
                n_ctx += 1
                _insert(ctx_keys, ctx_ids, cvs[j] * kp1 + j, cid)
                ctx_tot[cid] = 0
                ctx_dist[cid] = 0
                ctx_head[cid] = -1
            skey = cid * A + a
            eid = _lookup(sym_keys, sym_ids, skey)
            if eid < 0:
                eid = n_ent
                n_ent += 1
                _insert(sym_keys, sym_ids, skey, eid)
                ent_cnt[eid] = 0
                ent_sym[eid] = a
                ent_next[eid] = ctx_head[cid]
                ctx_head[cid] = eid
                ctx_dist[cid] += 1
            ent_cnt[eid] += 1
            ctx_tot[cid] += 1

        for j in range(k - 1, 0, -1):
            hist[j] = hist[j - 1]
        if k > 0:
            hist[0] = a
        meta[0] = nhist + 1 if nhist < k else k
        meta[1] = n_ctx
        meta[2] = n_ent
        i += 1
    return i


def _grown(arr, size, fill=0):
    new = np.full(size, fill, dtype=arr.dtype)
    new[: arr.shape[0]] = arr
    return new


class PPMModel:
    """Adaptive PPM state; ``feed`` returns per-symbol code lengths in bits."""

    def __init__(self, alphabet_size: int, order: int = 3, escape: str = "C", capacity: int = 64):
        if order < 0:
            raise DomainError("PPM order must be >= 0")
        if escape not in ESCAPE_METHODS:
            raise DomainError(f"unknown escape method {escape!r}; use one of {sorted(ESCAPE_METHODS)}")
        if alphabet_size < 2:
            raise DomainError("alphabet size must be >= 2")
        if alphabet_size ** order * (order + 1) >= 2 ** 62:
            raise DomainError("alphabet_size**order too large for 64-bit context keys")
        self.A = alphabet_size
        self.k = order
        self.method = ESCAPE_METHODS[escape]
        cap = max(16, 1 << (int(capacity) - 1).bit_length())
        self.hist = np.zeros(max(order, 1), dtype=np.int64)
        self.meta = np.zeros(3, dtype=np.int64)
        self.ctx_keys = np.full(2 * cap, _EMPTY, dtype=np.int64)
        self.ctx_ids = np.zeros(2 * cap, dtype=np.int64)
        self.ctx_tot = np.zeros(cap, dtype=np.int64)
        self.ctx_dist = np.zeros(cap, dtype=np.int64)
        self.ctx_head = np.zeros(cap, dtype=np.int64)
        self.sym_keys = np.full(2 * cap, _EMPTY, dtype=np.int64)
        self.sym_ids = np.zeros(2 * cap, dtype=np.int64)
        self.ent_cnt = np.zeros(cap, dtype=np.int64)
        self.ent_sym = np.zeros(cap, dtype=np.int64)
        self.ent_next = np.zeros(cap, dtype=np.int64)
        self._excl_mask = np.zeros(alphabet_size, dtype=np.bool_)
        self._excl_list = np.zeros(alphabet_size, dtype=np.int64)

    def copy(self) -> "PPMModel":
        new = object.__new__(PPMModel)
        for name, value in self.__dict__.items():
            setattr(new, name, value.copy() if isinstance(value, np.ndarray) else value)
        return new

    def _grow_contexts(self):
        size = 2 * self.ctx_tot.shape[0]
        keys = np.full(2 * size, _EMPTY, dtype=np.int64)
        ids = np.zeros(2 * size, dtype=np.int64)
        _rehash(self.ctx_keys, self.ctx_ids, keys, ids)
        self.ctx_keys, self.ctx_ids = keys, ids
        self.ctx_tot = _grown(self.ctx_tot, size)
        self.ctx_dist = _grown(self.ctx_dist, size)
        self.ctx_head = _grown(self.ctx_head, size)

    def _grow_entries(self):
        size = 2 * self.ent_cnt.shape[0]
        keys = np.full(2 * size, _EMPTY, dtype=np.int64)
        ids = np.zeros(2 * size, dtype=np.int64)
        _rehash(self.sym_keys, self.sym_ids, keys, ids)
        self.sym_keys, self.sym_ids = keys, ids
        self.ent_cnt = _grown(self.ent_cnt, size)
        self.ent_sym = _grown(self.ent_sym, size)
        self.ent_next = _grown(self.ent_next, size)

    def feed(self, data) -> np.ndarray:
        seq = np.ascontiguousarray(data, dtype=np.int64)
        out = np.empty(seq.shape[0], dtype=np.float64)
        pos = 0
        while True:
            pos = _feed(seq, pos, out, self.k, self.A, self.method, self.hist, self.meta,
                        self.ctx_keys, self.ctx_ids, self.ctx_tot, self.ctx_dist, self.ctx_head,
                        self.sym_keys, self.sym_ids, self.ent_cnt, self.ent_sym, self.ent_next,
                        self._excl_mask, self._excl_list)
            if pos >= seq.shape[0]:
                return out
            need = self.k + 1
            n_ctx, n_ent = int(self.meta[1]), int(self.meta[2])
            if n_ctx + need > self.ctx_tot.shape[0] or 2 * (n_ctx + need) > self.ctx_keys.shape[0]:
                self._grow_contexts()
            if n_ent + need > self.ent_cnt.shape[0] or 2 * (n_ent + need) > self.sym_keys.shape[0]:
                self._grow_entries()
