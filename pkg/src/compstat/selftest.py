"""Fast built-in checks run by ``compstat selftest``."""
from __future__ import annotations

import math

import numpy as np

from compstat.association import coefficient_v, yule_q
from compstat.codecs import Alphabet, CompressorSpec, Sequence, compress_length, conditional_length, kraft_sum
from compstat.homogeneity import ContingencyTable, chi_square_2x2, fisher_exact_2x2
from compstat.sources import MarkovModel, entropy_m, generate, kl_divergence


def _check(name, value, expected, tol):
    passed = value is not None and abs(value - expected) <= tol
    return {"name": name, "value": value, "expected": expected, "tolerance": tol, "passed": bool(passed)}


def run(spec: CompressorSpec | None = None) -> list[dict]:
    """Each check is ``{name, value, expected, tolerance, passed}``; ``spec`` drives the codec checks."""
    spec = spec or CompressorSpec()
    binary = Alphabet.binary()
    out = []
    if spec.sequential and spec.backend == "ppm":
        out.append(_check("kraft_sum n=8", kraft_sum(spec, 8, binary), 1.0, 1e-9))
    rng = np.random.default_rng(0)
    worst = 0.0
    positive = True
    for _ in range(20):
        u = Sequence(binary, rng.integers(0, 2, int(rng.integers(1, 40))))
        v = Sequence(binary, rng.integers(0, 2, int(rng.integers(1, 40))))
        cond = conditional_length(spec, v, u)
        worst = max(worst, abs(compress_length(spec, u + v) - compress_length(spec, u) - cond))
        positive &= cond > 0
    out.append(_check("conditional additivity (max error)", worst, 0.0, 1e-9))
    out.append({"name": "conditional length positive", "value": positive, "expected": True,
                "tolerance": 0, "passed": bool(positive)})

    t = ContingencyTable.of(30, 10, 10, 30)
    out.append(_check("chi-square (30,10,10,30) uncorrected", chi_square_2x2(t, yates=False).statistic, 20.0, 1e-9))
    fisher = fisher_exact_2x2(ContingencyTable.of(3, 1, 1, 3))
    out.append(_check("Fisher exact (3,1,1,3)", fisher, 34 / 70, 1e-12))
    t = ContingencyTable.of(40, 10, 10, 40)
    out.append(_check("Q(40,10,10,40)", yule_q(t), 15 / 17, 1e-9))
    out.append(_check("V(40,10,10,40)", coefficient_v(t), 0.6, 1e-9))

    out.append(_check("h(Bern 0.5)", entropy_m(MarkovModel.bernoulli(0.5), 0), 1.0, 0.0))
    h02 = -(0.2 * math.log2(0.2) + 0.8 * math.log2(0.8))
    out.append(_check("h(Bern 0.2)", entropy_m(MarkovModel.bernoulli(0.2), 0), h02, 1e-12))
    out.append(_check("D(Bern 0.5 || Bern 0.25)", kl_divergence([0.5, 0.5], [0.75, 0.25]),
                      0.5 + 0.5 * math.log2(2 / 3), 1e-12))
    s = generate(MarkovModel.bernoulli(0.2), 100_000, 7)
    out.append(_check("Bern(0.2) frequency, n=1e5", float(s.data.mean()), 0.2, 0.0064))
    return out
