"""YAML model and experiment files.

A model::

    alphabet: [a, b]
    order: 1
    transitions:          # one row per context; rows follow the alphabet order
      a: [0.9, 0.1]
      b: [0.2, 0.8]

``transitions`` may also be a plain list of rows in context-index order
(oldest symbol most significant).  Context keys are the context's symbols
separated by spaces; when every symbol prints as a single character the
spaces are optional; the order-0 context is ``""``.  An optional ``initial`` list gives
the starting-context law (default: stationary).

An experiment::

    experiment: delta_growth        # or homogeneity, classification, redundancy
    seed: 1
    trials: 200
    compressor: {backend: ppm, order: 0}
    sources:
      x: {bernoulli: 0.2}           # shorthand; or a full model, or {path: model.yaml}
      y: {bernoulli: 0.8}
    m_grid: [250, 500, 1000]
    context_length: 100000

``homogeneity`` takes ``sources: {x, y}``, ``sequences_per_group``,
``sequence_length``, ``alpha``, ``split``; ``classification`` takes a list of
sources, ``reference_length`` and ``query_lengths``; ``redundancy`` takes
``sources: {x}`` and ``lengths``.
"""
from __future__ import annotations

import itertools
from pathlib import Path

import yaml

from compstat.codecs import Alphabet, CompressorSpec
from compstat.errors import DomainError, InputError
from compstat.simulation import (
    ClassificationExperimentConfig,
    DeltaGrowthConfig,
    HomogeneityExperimentConfig,
)
from compstat.sources import MarkovModel

EXPERIMENTS = ("delta_growth", "homogeneity", "classification", "redundancy")


def _load_yaml(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except yaml.YAMLError as exc:
        raise DomainError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise DomainError(f"{path}: expected a mapping at top level")
    return data


def _context_key(ctx, single_chars: bool) -> str:
    return ("" if single_chars else " ").join(str(s) for s in ctx)


def model_from_dict(d: dict, base: Path | None = None) -> MarkovModel:
    if "path" in d:
        p = Path(d["path"])
        return load_model(p if p.is_absolute() or base is None else base / p)
    if "bernoulli" in d:
        return MarkovModel.bernoulli(float(d["bernoulli"]), name=str(d.get("name", "")))
    try:
        alphabet = Alphabet(tuple(d["alphabet"]))
        order = int(d.get("order", 0))
        rows = d["transitions"]
    except KeyError as exc:
        raise DomainError(f"model is missing field {exc.args[0]!r}") from None
    if isinstance(rows, dict):
        single = all(len(str(s)) == 1 for s in alphabet.symbols)
        sep = "" if single else " "
        keyed = {sep.join(str(k).split()): v for k, v in rows.items()}
        table = []
        for ctx in itertools.product(alphabet.symbols, repeat=order):
            key = _context_key(ctx, single)
            if key not in keyed:
                raise DomainError(f"model has no transition row for context {key!r}")
            table.append(keyed[key])
        rows = table
    return MarkovModel(alphabet, order, rows, d.get("initial"), name=str(d.get("name", "")))


def load_model(path) -> MarkovModel:
    return model_from_dict(_load_yaml(path), Path(path).parent)


def model_to_yaml(model: MarkovModel) -> str:
    d = model.to_dict()
    d["transitions"] = d.pop("transition")
    return yaml.safe_dump(d, sort_keys=False)


def load_experiment(path, seed: int | None = None, threads: int = 1):
    """Parse an experiment file into ``(kind, config)``; ``seed`` overrides the file's."""
    d = _load_yaml(path)
    base = Path(path).parent
    kind = d.get("experiment")
    if kind not in EXPERIMENTS:
        raise DomainError(f"experiment must be one of {EXPERIMENTS}, got {kind!r}")
    spec = CompressorSpec.from_dict(d.get("compressor", {"backend": "ppm", "order": 3}))
    seed = int(d.get("seed", 0)) if seed is None else seed
    sources = d.get("sources")
    if not sources:
        raise DomainError("experiment needs 'sources'")
    if kind == "classification":
        models = tuple(model_from_dict(s, base) for s in sources)
        return kind, ClassificationExperimentConfig(
            models,
            reference_length=int(d.get("reference_length", 100_000)),
            query_lengths=tuple(int(n) for n in d.get("query_lengths", (250, 1000, 4000))),
            trials=int(d.get("trials", 500)), spec=spec, seed=seed, threads=threads)
    x = model_from_dict(sources["x"], base)
    if kind == "redundancy":
        return kind, {"model": x, "spec": spec, "seed": seed, "threads": threads,
                      "lengths": tuple(int(n) for n in d.get("lengths", (1000, 10_000, 100_000))),
                      "trials": int(d.get("trials", 10))}
    y = model_from_dict(sources.get("y", sources["x"]), base)
    if kind == "delta_growth":
        return kind, DeltaGrowthConfig(
            x, y, m_grid=tuple(int(m) for m in d.get("m_grid", (250, 500, 1000, 2000, 4000))),
            context_length=int(d.get("context_length", 100_000)), trials=int(d.get("trials", 200)),
            spec=spec, seed=seed, threads=threads)
    return kind, HomogeneityExperimentConfig(
        x, y, sequences_per_group=int(d.get("sequences_per_group", 20)),
        sequence_length=int(d.get("sequence_length", 5000)), trials=int(d.get("trials", 400)),
        alpha=float(d.get("alpha", 0.05)), spec=spec, split=str(d.get("split", "first")),
        seed=seed, threads=threads)
