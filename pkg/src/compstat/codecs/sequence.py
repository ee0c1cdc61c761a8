from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence as _Seq

import numpy as np

from compstat.errors import DomainError


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of distinct tokens; a symbol's index is its code."""

    symbols: tuple

    def __post_init__(self):
        syms = tuple(self.symbols)
        object.__setattr__(self, "symbols", syms)
        if len(syms) < 2:
            raise DomainError(f"alphabet needs at least 2 symbols, got {len(syms)}")
        if len(set(syms)) != len(syms):
            raise DomainError("alphabet symbols must be distinct")
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(syms)})

    @property
    def size(self) -> int:
        return len(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def index(self, symbol: Hashable) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise DomainError(f"symbol {symbol!r} not in alphabet") from None

    @classmethod
    def from_string(cls, chars: str) -> "Alphabet":
        return cls(tuple(chars))

    @classmethod
    def binary(cls) -> "Alphabet":
        return cls((0, 1))


class Sequence:
    """A word over an :class:`Alphabet`, stored as an int32 index array.

    Instances are treated as immutable; ``data`` is made read-only.
    """

    __slots__ = ("alphabet", "data")

    def __init__(self, alphabet: Alphabet, data):
        arr = np.ascontiguousarray(data, dtype=np.int32)
        if arr.ndim != 1:
            raise DomainError("sequence data must be one-dimensional")
        if arr.size and (arr.min() < 0 or arr.max() >= alphabet.size):
            raise DomainError("sequence index out of alphabet range")
        arr.setflags(write=False)
        self.alphabet = alphabet
        self.data = arr

    @classmethod
    def from_symbols(cls, alphabet: Alphabet, symbols: Iterable) -> "Sequence":
        return cls(alphabet, [alphabet.index(s) for s in symbols])

    @classmethod
    def from_string(cls, text: str, alphabet: Alphabet | None = None) -> "Sequence":
        """Character sequence; the alphabet defaults to the sorted characters of ``text``."""
        if alphabet is None:
            alphabet = Alphabet(tuple(sorted(set(text))))
        return cls.from_symbols(alphabet, text)

    @property
    def length(self) -> int:
        return int(self.data.size)

    def __len__(self):
        return int(self.data.size)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return Sequence(self.alphabet, self.data[item])
        return int(self.data[item])

    def __eq__(self, other):
        if not isinstance(other, Sequence):
            return NotImplemented
        return self.alphabet == other.alphabet and np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash((self.alphabet, self.data.tobytes()))

    def __repr__(self):
        head = "".join(str(self.alphabet.symbols[i]) for i in self.data[:20])
        more = "..." if len(self) > 20 else ""
        return f"Sequence(len={len(self)}, {head!r}{more})"

    def symbols(self) -> list:
        return [self.alphabet.symbols[i] for i in self.data]

    def __add__(self, other: "Sequence") -> "Sequence":
        return concat([self, other])


def check_same_alphabet(*seqs: Sequence) -> Alphabet:
    alphabet = seqs[0].alphabet
    for s in seqs[1:]:
        if s.alphabet != alphabet:
            raise DomainError("sequences are over different alphabets")
    return alphabet


def concat(seqs: _Seq[Sequence], alphabet: Alphabet | None = None) -> Sequence:
    """Concatenate without separators. ``alphabet`` is required for an empty list."""
    if not seqs:
        if alphabet is None:
            raise DomainError("cannot infer alphabet of an empty concatenation")
        return Sequence(alphabet, [])
    alph = check_same_alphabet(*seqs)
    if alphabet is not None and alphabet != alph:
        raise DomainError("sequences are over different alphabets")
    return Sequence(alph, np.concatenate([s.data for s in seqs]))
