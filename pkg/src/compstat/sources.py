"""Finite-memory Markov sources: generation, entropies, KL divergence.

Contexts of a memory-``M`` model are numbered big-endian: the context
``v_1 ... v_M`` (oldest first) has index ``sum(v_i * A**(M-i))``, so the
successor of context ``c`` after symbol ``a`` is ``(c*A + a) % A**M``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numba
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from compstat.codecs import Alphabet, Sequence
from compstat.errors import DomainError, ResourceError

MAX_CONTEXTS = 2 ** 20
ROW_TOL = 1e-12


class InfiniteDivergenceWarning(RuntimeWarning):
    pass


@dataclass(frozen=True, eq=False)
class MarkovModel:
    """Stationary source whose next-symbol law depends on the last ``order`` symbols.

    ``transition[c, a]`` is the probability of symbol ``a`` after context ``c``.
    ``initial`` is the law of the first context; ``None`` means the
    stationary law.
    """

    alphabet: Alphabet
    order: int
    transition: np.ndarray
    initial: np.ndarray | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        A = self.alphabet.size
        if self.order < 0:
            raise DomainError("model order must be >= 0")
        if A ** self.order > MAX_CONTEXTS:
            raise ResourceError(f"{A}**{self.order} contexts exceeds {MAX_CONTEXTS}")
        P = np.array(self.transition, dtype=np.float64)
        if P.shape != (A ** self.order, A):
            raise DomainError(f"transition must have shape {(A ** self.order, A)}, got {P.shape}")
        if (P < 0).any() or not np.all(np.abs(P.sum(axis=1) - 1.0) <= ROW_TOL):
            raise DomainError("transition rows must be nonnegative and sum to 1")
        P.setflags(write=False)
        object.__setattr__(self, "transition", P)
        if self.initial is not None:
            init = np.array(self.initial, dtype=np.float64)
            if init.shape != (A ** self.order,) or (init < 0).any() or abs(init.sum() - 1.0) > ROW_TOL:
                raise DomainError("initial distribution must be a probability vector over contexts")
            init.setflags(write=False)
            object.__setattr__(self, "initial", init)

    @classmethod
    def iid(cls, probs, alphabet: Alphabet | None = None, name: str = "") -> "MarkovModel":
        probs = np.asarray(probs, dtype=np.float64)
        if alphabet is None:
            alphabet = Alphabet(tuple(range(probs.size)))
        return cls(alphabet, 0, probs.reshape(1, -1), name=name)

    @classmethod
    def bernoulli(cls, p: float, name: str = "") -> "MarkovModel":
        """i.i.d. bits with ``P(1) = p``."""
        return cls.iid([1.0 - p, p], Alphabet.binary(), name=name or f"bernoulli({p})")

    @classmethod
    def binary_chain(cls, p01: float, p10: float, name: str = "") -> "MarkovModel":
        """Order-1 binary chain with ``P(1|0) = p01`` and ``P(0|1) = p10``."""
        P = [[1.0 - p01, p01], [p10, 1.0 - p10]]
        return cls(Alphabet.binary(), 1, P, name=name or f"chain({p01},{p10})")

    def __eq__(self, other):
        if not isinstance(other, MarkovModel):
            return NotImplemented
        same_init = (self.initial is None and other.initial is None) or (
            self.initial is not None and other.initial is not None
            and np.array_equal(self.initial, other.initial)
        )
        return (self.alphabet == other.alphabet and self.order == other.order
                and np.array_equal(self.transition, other.transition) and same_init)

    def __hash__(self):
        return hash((self.alphabet, self.order, self.transition.tobytes()))

    @property
    def n_contexts(self) -> int:
        return self.alphabet.size ** self.order

    @cached_property
    def stationary(self) -> np.ndarray:
        """Stationary law over contexts; raises if it is not unique."""
        return stationary_distribution(self.transition, self.alphabet.size, self.order)

    def start_distribution(self) -> np.ndarray:
        return self.stationary if self.initial is None else self.initial

    def lifted(self, order: int) -> np.ndarray:
        """Transition matrix re-indexed by contexts of a larger ``order``."""
        if order < self.order:
            raise DomainError("can only lift to a larger order")
        idx = np.arange(self.alphabet.size ** order) % self.n_contexts
        return self.transition[idx]

    def to_dict(self) -> dict:
        d = {
            "alphabet": list(self.alphabet.symbols),
            "order": self.order,
            "transition": self.transition.tolist(),
        }
        if self.initial is not None:
            d["initial"] = self.initial.tolist()
        if self.name:
            d["name"] = self.name
        return d


def _successor_matrix(P: np.ndarray, A: int, order: int) -> csr_matrix:
    n = A ** order
    rows = np.repeat(np.arange(n), A)
    cols = (np.arange(n * A)) % n
    return csr_matrix((P.ravel(), (rows, cols)), shape=(n, n))


def stationary_distribution(P: np.ndarray, A: int, order: int) -> np.ndarray:
    n = A ** order
    if n == 1:
        return np.ones(1)
    T = _successor_matrix(P, A, order)
    # unique stationary law <=> exactly one closed communicating class
    graph = T.copy()
    graph.data = (graph.data > 0).astype(np.int8)
    graph.eliminate_zeros()
    n_comp, labels = connected_components(graph, directed=True, connection="strong")
    if n_comp > 1:
        coo = T.tocoo()
        mask = coo.data > 0
        leaving = labels[coo.row[mask]] != labels[coo.col[mask]]
        closed = set(range(n_comp)) - set(labels[coo.row[mask][leaving]].tolist())
        if len(closed) != 1:
            raise DomainError("chain has no unique stationary distribution (not irreducible)")
    if n <= 4096:
        M = T.toarray().T - np.eye(n)
        M[-1, :] = 1.0
        rhs = np.zeros(n)
        rhs[-1] = 1.0
        # one balance equation is redundant; replace it by the normalization
        pi = np.linalg.solve(M, rhs)
    else:
        pi = np.full(n, 1.0 / n)
        for _ in range(1_000_000):
            nxt = 0.5 * pi + 0.5 * (pi[:, None] * P).reshape(A, n).sum(axis=0)
            done = np.abs(nxt - pi).sum() < 1e-13
            pi = nxt
            if done:
                break
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


@numba.njit(cache=True)
def _walk(cum, ctx, uniforms, A, n_ctx):
    out = np.empty(uniforms.shape[0], dtype=np.int32)
    for i in range(uniforms.shape[0]):
        row = cum[ctx]
        a = 0
        while a < A - 1 and uniforms[i] >= row[a]:
            a += 1
        out[i] = a
        ctx = (ctx * A + a) % n_ctx
    return out


def generate(model: MarkovModel, length: int, seed) -> Sequence:
    """Draw ``length`` symbols; the starting context comes from ``model.start_distribution()``."""
    if length < 1:
        raise DomainError("length must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    A = model.alphabet.size
    cum = np.cumsum(model.transition, axis=1)
    cum[:, -1] = 1.0
    ctx = int(rng.choice(model.n_contexts, p=model.start_distribution())) if model.order else 0
    uniforms = rng.random(length)
    if model.order == 0:
        data = np.minimum(np.searchsorted(cum[0], uniforms, side="right"), A - 1)
    else:
        data = _walk(cum, ctx, uniforms, A, model.n_contexts)
    return Sequence(model.alphabet, data)


def _xlogx_rows(P: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(P > 0, P * np.log2(P), 0.0)
    return -terms.sum(axis=-1)


def entropy_m(model: MarkovModel, m: int) -> float:
    """Order-``m`` conditional Shannon entropy (bits/symbol) under the stationary law."""
    if m < 0:
        raise DomainError("entropy order must be >= 0")
    A, M = model.alphabet.size, model.order
    if A ** m > MAX_CONTEXTS:
        raise ResourceError(f"{A}**{m} contexts exceeds {MAX_CONTEXTS}")
    pi = model.stationary
    if m >= M:
        return float(pi @ _xlogx_rows(model.transition))
    joint = (pi[:, None] * model.transition).reshape(-1, A ** (m + 1)).sum(axis=0)
    joint = joint.reshape(A ** m, A)
    marg = joint.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(marg > 0, joint / marg, 0.0)
    return float(marg[:, 0] @ _xlogx_rows(cond))


def limit_entropy(model: MarkovModel) -> float:
    return entropy_m(model, model.order)


def binary_entropy(p: float) -> float:
    return float(_xlogx_rows(np.array([p, 1.0 - p])))


def kl_divergence(p, q) -> float:
    """D(p||q) in bits. Returns ``inf`` (with a warning) if q misses mass of p."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise DomainError("distributions must have the same support")
    if (p < 0).any() or (q < 0).any():
        raise DomainError("probabilities must be nonnegative")
    support = p > 0
    if (q[support] == 0).any():
        warnings.warn("q assigns zero probability where p is positive", InfiniteDivergenceWarning, stacklevel=2)
        return math.inf
    return float(np.sum(p[support] * np.log2(p[support] / q[support])))


def kl_rate(mx: MarkovModel, my: MarkovModel) -> float:
    """Per-symbol divergence rate of ``my`` from ``mx``, averaged over ``mx``'s stationary contexts."""
    if mx.alphabet != my.alphabet:
        raise DomainError("models are over different alphabets")
    order = max(mx.order, my.order)
    Px, Py = mx.lifted(order), my.lifted(order)
    pi = np.ones(1) if order == 0 else MarkovModel(mx.alphabet, order, Px).stationary
    rates = []
    for c in np.flatnonzero(pi > 0):
        d = kl_divergence(Px[c], Py[c])
        if math.isinf(d):
            return math.inf
        rates.append(pi[c] * d)
    return math.fsum(rates)
