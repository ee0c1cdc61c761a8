"""Reading corpora into sample groups."""
from __future__ import annotations

import hashlib
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from compstat.codecs import Alphabet, Sequence
from compstat.errors import DomainError, InputError
from compstat.homogeneity import SampleGroup

log = logging.getLogger(__name__)

TOKENIZERS = ("bytes", "utf8", "words")
OOV = "<OOV>"


@dataclass
class CorpusSpec:
    """One path per group: a directory (one sequence per file) or a file split on ``delimiter``."""

    groups: list                       # [(label, path), ...]
    tokenize: str = "bytes"
    vocab_cap: int = 5000
    delimiter: str = "\n"
    split_files: bool = True           # False: a single file is one sequence

    def __post_init__(self):
        if self.tokenize not in TOKENIZERS:
            raise DomainError(f"unknown tokenization {self.tokenize!r}")
        if self.vocab_cap < 1:
            raise DomainError("vocabulary cap must be >= 1")
        if not self.delimiter:
            raise DomainError("record delimiter must be nonempty")


@dataclass
class Corpus:
    groups: list
    alphabet: Alphabet
    digests: list = field(default_factory=list)   # [{"group", "path", "sha256"}]
    warnings: list = field(default_factory=list)
    record_names: dict = field(default_factory=dict)  # label -> [name per sequence]


def _read(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _records(label: str, path: Path, delimiter: bytes | None, digests: list):
    """Yield (name, raw bytes) in deterministic order."""
    if path.is_dir():
        files = sorted((p for p in path.iterdir() if p.is_file()), key=lambda p: p.name)
        for p in files:
            raw = _read(p)
            digests.append({"group": label, "path": str(p), "sha256": hashlib.sha256(raw).hexdigest()})
            yield p.name, raw
    elif path.is_file():
        raw = _read(path)
        digests.append({"group": label, "path": str(path), "sha256": hashlib.sha256(raw).hexdigest()})
        if delimiter is None:
            yield path.name, raw
            return
        for i, rec in enumerate(raw.split(delimiter)):
            yield f"{path.name}#{i}", rec
    else:
        raise InputError(f"cannot read {path}: no such file or directory")


def _tokens(raw: bytes, mode: str, where: str) -> list:
    if mode == "bytes":
        return list(raw)
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InputError(f"{where} is not valid UTF-8: {exc}") from exc
    return list(text) if mode == "utf8" else text.split()


def ingest(spec: CorpusSpec) -> Corpus:
    """Tokenize every group; the alphabet is the sorted union of observed tokens."""
    delimiter = spec.delimiter.encode("utf-8") if spec.split_files else None
    digests, warnings = [], []
    raw_groups = []
    for label, path in spec.groups:
        recs = []
        for name, raw in _records(label, Path(path), delimiter, digests):
            toks = _tokens(raw, spec.tokenize, f"{path}:{name}")
            if not toks:
                msg = f"skipping empty record {name!r} in group {label!r}"
                log.warning(msg)
                warnings.append(msg)
                continue
            recs.append((name, toks))
        if not recs:
            raise DomainError(f"group {label!r} has no nonempty sequences")
        raw_groups.append((label, recs))

    if spec.tokenize == "words":
        freq = Counter(t for _, recs in raw_groups for _, toks in recs for t in toks)
        ranked = sorted(freq, key=lambda t: (-freq[t], t))
        keep = set(ranked[: spec.vocab_cap])
        if len(freq) > spec.vocab_cap:
            raw_groups = [(label, [(n, [t if t in keep else OOV for t in toks]) for n, toks in recs])
                          for label, recs in raw_groups]
    symbols = sorted({t for _, recs in raw_groups for _, toks in recs for t in toks})
    if len(symbols) < 2:
        raise DomainError("corpus has fewer than 2 distinct tokens; nothing to compress")
    alphabet = Alphabet(tuple(symbols))
    groups, names = [], {}
    for label, recs in raw_groups:
        groups.append(SampleGroup(label, [Sequence.from_symbols(alphabet, toks) for _, toks in recs]))
        names[label] = [n for n, _ in recs]
    return Corpus(groups, alphabet, digests, warnings, names)
