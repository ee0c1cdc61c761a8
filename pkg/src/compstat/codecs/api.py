"""Compressor specs and the code-length operations the statistics are built on."""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass

from compstat.codecs import bwt as _bwt
from compstat.codecs import external as _external
from compstat.codecs.lz78 import LZ78Model, phrase_bits
from compstat.codecs.ppm import ESCAPE_METHODS, PPMModel
from compstat.codecs.sequence import Alphabet, Sequence, check_same_alphabet, concat
from compstat.errors import DomainError, ResourceError

BACKENDS = ("lz78", "ppm", "bwt", "external")
KRAFT_MAX_WORDS = 2 ** 20


@dataclass(frozen=True)
class CompressorSpec:
    backend: str = "ppm"
    order: int = 3
    escape: str = "C"
    block_size: int | None = None
    accounting: str = "sequential"
    command: str | None = None

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise DomainError(f"unknown backend {self.backend!r}")
        if self.backend == "ppm":
            if self.order < 0:
                raise DomainError("PPM order must be >= 0")
            if self.escape not in ESCAPE_METHODS:
                raise DomainError(f"unknown PPM escape method {self.escape!r}")
        if self.backend == "bwt" and self.block_size is not None and self.block_size < 1:
            raise DomainError("BWT block size must be >= 1")
        if self.backend == "lz78" and self.accounting not in ("sequential", "phrase"):
            raise DomainError(f"unknown LZ78 accounting {self.accounting!r}")
        if self.backend == "external" and not self.command:
            raise DomainError("external backend needs a command template")

    @classmethod
    def ppm(cls, order: int = 3, escape: str = "C") -> "CompressorSpec":
        return cls("ppm", order=order, escape=escape)

    @classmethod
    def lz78(cls, accounting: str = "sequential") -> "CompressorSpec":
        return cls("lz78", accounting=accounting)

    @classmethod
    def bwt(cls, block_size: int | None = None) -> "CompressorSpec":
        return cls("bwt", block_size=block_size)

    @classmethod
    def external(cls, command: str) -> "CompressorSpec":
        return cls("external", command=command)

    @property
    def sequential(self) -> bool:
        """True if code lengths are sums of per-symbol costs of an adaptive model."""
        return self.backend == "ppm" or (self.backend == "lz78" and self.accounting == "sequential")

    def new_model(self, alphabet: Alphabet):
        if self.backend == "ppm":
            return PPMModel(alphabet.size, self.order, self.escape)
        if self.sequential:
            return LZ78Model(alphabet.size)
        raise DomainError(f"backend {self.backend!r} has no sequential model")

    def to_dict(self) -> dict:
        d = asdict(self)
        keep = {
            "ppm": ("order", "escape"),
            "lz78": ("accounting",),
            "bwt": ("block_size",),
            "external": ("command",),
        }[self.backend]
        return {"backend": self.backend, **{k: d[k] for k in keep}}

    @classmethod
    def from_dict(cls, d: dict) -> "CompressorSpec":
        return cls(**d)


def _require_nonempty(s: Sequence):
    if len(s) == 0:
        raise DomainError("cannot compress an empty sequence")


def _whole_bits(spec: CompressorSpec, s: Sequence) -> float:
    if spec.sequential:
        return math.fsum(spec.new_model(s.alphabet).feed(s.data))
    if spec.backend == "lz78":
        return float(phrase_bits(s.data, s.alphabet.size))
    if spec.backend == "bwt":
        return _bwt.code_bits(s.data, s.alphabet.size, spec.block_size)
    return _external.code_bits(spec.command, s)


def compress_length(spec: CompressorSpec, s: Sequence) -> float:
    """Code length of ``s`` in bits."""
    _require_nonempty(s)
    return _whole_bits(spec, s)


def symbol_costs(spec: CompressorSpec, s: Sequence):
    """Per-symbol bits for sequential backends (their sum is ``compress_length``)."""
    return spec.new_model(s.alphabet).feed(s.data)


class Conditioner:
    """Conditional code lengths against one fixed context.

    The context is processed once; for sequential backends the primed model
    is copied for every target, otherwise the context's own length is cached.
    """

    def __init__(self, spec: CompressorSpec, context: Sequence):
        self.spec = spec
        self.context = context
        self._model = None
        self._context_bits = 0.0
        if spec.sequential:
            self._model = spec.new_model(context.alphabet)
            self._model.feed(context.data)
        elif len(context):
            self._context_bits = _whole_bits(spec, context)

    def length(self, target: Sequence) -> float:
        _require_nonempty(target)
        check_same_alphabet(target, self.context)
        if self._model is not None:
            return math.fsum(self._model.copy().feed(target.data))
        if not len(self.context):
            return _whole_bits(self.spec, target)
        return _whole_bits(self.spec, concat([self.context, target])) - self._context_bits


def condition_on(spec: CompressorSpec, context: Sequence) -> Conditioner:
    return Conditioner(spec, context)


def conditional_length(spec: CompressorSpec, target: Sequence, context: Sequence) -> float:
    """Bits for ``target`` after ``context``: ``|phi(context+target)| - |phi(context)|``."""
    return Conditioner(spec, context).length(target)


def induced_probability(spec: CompressorSpec, s: Sequence) -> float:
    return 2.0 ** -compress_length(spec, s)


def kraft_sum(spec: CompressorSpec, n: int, alphabet: Alphabet) -> float:
    """Sum of ``2**-|phi(u)|`` over every word ``u`` of length ``n``."""
    if n < 1:
        raise DomainError("word length must be >= 1")
    if alphabet.size ** n > KRAFT_MAX_WORDS:
        raise ResourceError(f"{alphabet.size}**{n} words exceeds the enumeration guard of {KRAFT_MAX_WORDS}")
    terms = [
        2.0 ** -compress_length(spec, Sequence(alphabet, word))
        for word in itertools.product(range(alphabet.size), repeat=n)
    ]
    return math.fsum(terms)


def delta_statistic(spec: CompressorSpec, w: Sequence, x_ctx: Sequence, y_ctx: Sequence) -> float:
    """``|phi(w/y_ctx)| - |phi(w/x_ctx)|``; positive when ``w`` fits ``x_ctx`` better."""
    check_same_alphabet(w, x_ctx, y_ctx)
    return conditional_length(spec, w, y_ctx) - conditional_length(spec, w, x_ctx)
