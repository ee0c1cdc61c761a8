"""Command-line front end.

Every subcommand writes one JSON report (see ``schema/report.schema.json``)
to stdout or ``--out``.  Exit codes: 0 completed, 2 completed with the
homogeneity null rejected, 1 any error (reported as JSON on stderr).
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
from pathlib import Path

from compstat import __version__
from compstat.association import associate
from compstat.classify import DEFAULT_RATIO_THRESHOLD, TrainingBank, classify
from compstat.codecs import CompressorSpec, Sequence
from compstat.corpus import TOKENIZERS, CorpusSpec, ingest
from compstat.errors import CompstatError, InputError, UsageError
from compstat.homogeneity import (
    ContingencyTable,
    Decision,
    SplitPlan,
    build_2x2,
    gamma_scores,
    delta_scores,
    homogeneity_test,
    homogeneity_test_multi,
    split,
)
from compstat.report import RunReport, error_document

EXIT_OK, EXIT_ERROR, EXIT_REJECT = 0, 1, 2

log = logging.getLogger("compstat")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _alpha(text: str) -> float:
    try:
        a = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < a < 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {text}")
    return a


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def _nonneg_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {n}")
    return n


def _labelled(text: str) -> tuple[str, str]:
    label, sep, path = text.partition("=")
    if not sep or not label or not path:
        raise argparse.ArgumentTypeError(f"expected LABEL=PATH, got {text!r}")
    return label, path


def _table(text: str) -> tuple[int, int, int, int]:
    parts = text.split(",")
    try:
        cells = tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected four integers a,b,c,d, got {text!r}") from None
    if len(cells) != 4 or min(cells) < 0:
        raise argparse.ArgumentTypeError(f"expected four nonnegative integers a,b,c,d, got {text!r}")
    return cells


def _common(p: argparse.ArgumentParser, corpus: bool = True, compressor: bool = True):
    g = p.add_argument_group("run")
    if compressor:
        g.add_argument("--alpha", type=_alpha, default=0.05)
        g.add_argument("--split", choices=("first", "random"), default="first")
    g.add_argument("--seed", type=_nonneg_int, default=0 if compressor else None,
                   help="master seed" + ("" if compressor else " (default: the config file's)"))
    g.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1)
    g.add_argument("--out", metavar="PATH", default=None)
    g.add_argument("--timings", action="store_true",
                   help="include wall-clock timings (makes reports differ between runs)")
    if not compressor:
        return
    g = p.add_argument_group("compressor")
    g.add_argument("--backend", choices=("lz78", "ppm", "bwt", "external"), default="ppm")
    g.add_argument("--ppm-order", type=_nonneg_int, default=3)
    g.add_argument("--ppm-escape", choices=("A", "C", "D"), default="C")
    g.add_argument("--lz78-accounting", choices=("sequential", "phrase"), default="sequential")
    g.add_argument("--bwt-block", type=_positive_int, default=None, help="BWT block size (default: whole input)")
    g.add_argument("--external-cmd", metavar="TEMPLATE", default=None,
                   help="shell command; {input} is replaced by a temp file path, otherwise data goes to stdin")
    if corpus:
        g = p.add_argument_group("input")
        g.add_argument("--tokenize", choices=TOKENIZERS, default="bytes")
        g.add_argument("--vocab-cap", type=_positive_int, default=5000)
        g.add_argument("--delimiter", default="\n", help="record separator for single-file groups")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="compstat", description="Compression-based homogeneity tests, association and classification.")
    p.add_argument("--version", action="version", version=f"compstat {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    h = sub.add_parser("homogeneity", help="test whether sample groups come from the same source")
    h.add_argument("groups", nargs="+", type=_labelled, metavar="LABEL=PATH")
    _common(h)

    a = sub.add_parser("associate", help="Yule's Q and V for two groups or a given 2x2 table")
    a.add_argument("groups", nargs="*", type=_labelled, metavar="LABEL=PATH")
    a.add_argument("--table", type=_table, metavar="A,B,C,D", help="use this table instead of building one")
    a.add_argument("--confidence", type=_alpha, default=0.95)
    _common(a)

    c = sub.add_parser("classify", help="assign query files to the closest reference class")
    c.add_argument("queries", nargs="+", metavar="QUERY")
    c.add_argument("--class", dest="classes", action="append", type=_labelled, required=True, metavar="LABEL=PATH")
    c.add_argument("--ratio-threshold", type=float, default=DEFAULT_RATIO_THRESHOLD)
    _common(c)

    s = sub.add_parser("simulate", help="run a Monte Carlo experiment from a config file")
    s.add_argument("--config", required=True, metavar="PATH",
                   help="experiment file; it also fixes the compressor, alpha and split")
    _common(s, corpus=False, compressor=False)

    t = sub.add_parser("selftest", help="quick built-in consistency checks")
    _common(t, corpus=False)
    return p


def _spec(args) -> CompressorSpec:
    return CompressorSpec(args.backend, order=args.ppm_order, escape=args.ppm_escape, block_size=args.bwt_block,
                          accounting=args.lz78_accounting, command=args.external_cmd)


def _run_config(args) -> dict:
    cfg = {"alpha": args.alpha, "seed": args.seed, "split": args.split, "threads": args.threads,
           "compressor": _spec(args).to_dict()}
    if hasattr(args, "tokenize"):
        cfg.update(tokenize=args.tokenize, vocab_cap=args.vocab_cap, delimiter=args.delimiter)
    return cfg


def _corpus(args, groups, split_files=True):
    return ingest(CorpusSpec(list(groups), args.tokenize, args.vocab_cap, args.delimiter, split_files))


def _group_config(corpus, groups) -> list:
    return [{"label": g.label, "path": str(path), "records": corpus.record_names[g.label]}
            for g, (_, path) in zip(corpus.groups, groups)]


def run_homogeneity(args):
    corpus = _corpus(args, args.groups)
    spec, plan = _spec(args), SplitPlan(args.split, args.seed)
    if len(corpus.groups) < 2:
        raise UsageError("homogeneity needs at least two groups")
    if len(corpus.groups) == 2:
        report = homogeneity_test(*corpus.groups, spec, args.alpha, plan, args.threads)
    else:
        report = homogeneity_test_multi(corpus.groups, spec, args.alpha, plan, args.threads)
    cfg = _run_config(args) | {"groups": _group_config(corpus, args.groups), "alphabet_size": corpus.alphabet.size}
    code = EXIT_REJECT if report.decision is Decision.REJECT_H0 else EXIT_OK
    return cfg, corpus.digests, corpus.warnings + list(report.requirement_warnings), report.to_dict(), code


def run_associate(args):
    if args.table is not None:
        if args.groups:
            raise UsageError("give either --table or two groups, not both")
        table = ContingencyTable.of(*args.table)
        cfg = _run_config(args) | {"table": list(args.table), "confidence": args.confidence}
        digests, warnings = [], []
    else:
        if len(args.groups) != 2:
            raise UsageError("associate needs exactly two groups (or --table)")
        corpus = _corpus(args, args.groups)
        spec, plan = _spec(args), SplitPlan(args.split, args.seed)
        x, y = corpus.groups
        x_star, x_hat = split(x, plan, salt=0)
        y_star, y_hat = split(y, plan, salt=1)
        gammas = gamma_scores(x_hat, x_star, y_star, spec, args.threads)
        deltas = delta_scores(y_hat, x_star, y_star, spec, args.threads)
        table = build_2x2(gammas, deltas, labels=(x.label, y.label))
        cfg = _run_config(args) | {"groups": _group_config(corpus, args.groups), "confidence": args.confidence,
                                   "alphabet_size": corpus.alphabet.size}
        digests, warnings = corpus.digests, list(corpus.warnings)
    report = associate(table, args.confidence)
    return cfg, digests, warnings + list(report.notes), report.to_dict(), EXIT_OK


def run_classify(args):
    labels = [label for label, _ in args.classes]
    if len(set(labels)) != len(labels):
        raise UsageError("class labels must be distinct")
    # References and queries share one alphabet: ingest them together, one
    # group per class plus one per query file.
    qgroups = [(f"query:{i}", q) for i, q in enumerate(args.queries)]
    corpus = _corpus(args, list(args.classes) + qgroups, split_files=False)
    k = len(args.classes)
    refs = []
    for g in corpus.groups[:k]:
        ref = g.sequences[0] if len(g.sequences) == 1 else Sequence(corpus.alphabet, _cat(g.sequences))
        refs.append((g.label, ref))
    bank = TrainingBank(refs, _spec(args))
    results, warnings = [], list(corpus.warnings)
    for (_, path), g in zip(qgroups, corpus.groups[k:]):
        for name, u in zip(corpus.record_names[g.label], g.sequences):
            r = classify(u, bank, args.ratio_threshold)
            if r.ratio_warning:
                warnings.append(f"{name}: {r.ratio_warning}")
            results.append({"query": path, "record": name, **r.to_dict()})
    cfg = _run_config(args) | {"classes": [{"label": l, "path": str(p)} for l, p in args.classes],
                               "queries": list(args.queries), "ratio_threshold": args.ratio_threshold,
                               "alphabet_size": corpus.alphabet.size}
    return cfg, corpus.digests, warnings, {"labels": bank.labels, "classifications": results}, EXIT_OK


def _cat(seqs):
    import numpy as np
    return np.concatenate([s.data for s in seqs])


def run_simulate(args):
    import hashlib

    from compstat.modelfile import load_experiment
    from compstat.simulation import delta_growth_experiment, error_rate_experiment, redundancy_experiment

    path = Path(args.config)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    kind, cfg = load_experiment(path, seed=args.seed, threads=args.threads)
    if kind == "delta_growth":
        result, resolved = delta_growth_experiment(cfg).to_dict(), cfg.to_dict()
    elif kind == "redundancy":
        rep = redundancy_experiment(cfg["model"], cfg["spec"], cfg["lengths"], cfg["trials"], cfg["seed"], cfg["threads"])
        result = rep.to_dict()
        resolved = {"experiment": kind, "source_x": cfg["model"].to_dict(), "spec": cfg["spec"].to_dict(),
                    "lengths": list(cfg["lengths"]), "trials": cfg["trials"], "seed": cfg["seed"]}
    else:
        result, resolved = error_rate_experiment(cfg).to_dict(), cfg.to_dict()
    digests = [{"group": "config", "path": str(path), "sha256": hashlib.sha256(raw).hexdigest()}]
    config = {"config_file": str(path), "experiment": resolved, "seed": resolved["seed"], "threads": args.threads}
    return config, digests, [], result, EXIT_OK


def run_selftest(args):
    from compstat import selftest
    checks = selftest.run(_spec(args))
    ok = all(c["passed"] for c in checks)
    return _run_config(args), [], [], {"passed": ok, "checks": checks}, EXIT_OK if ok else EXIT_ERROR


COMMANDS = {
    "homogeneity": run_homogeneity,
    "associate": run_associate,
    "classify": run_classify,
    "simulate": run_simulate,
    "selftest": run_selftest,
}


def _finite(obj):
    """Replace non-finite floats (JSON has none) with strings."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="compstat: %(levelname)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        t0 = time.perf_counter()
        config, digests, warnings, result, code = COMMANDS[args.command](args)
        elapsed = time.perf_counter() - t0
        report = RunReport(args.command, _finite(config), _finite(result), digests, warnings,
                           {"wall_seconds": elapsed} if args.timings else None)
        text = report.to_json()
        if args.out:
            try:
                Path(args.out).write_text(text, encoding="utf-8")
            except OSError as exc:
                raise InputError(f"cannot write {args.out}: {exc.strerror or exc}") from exc
        else:
            sys.stdout.write(text)
        return code
    except CompstatError as exc:
        sys.stderr.write(error_document(exc.code, str(exc)))
    except (ValueError, ArithmeticError, OSError, RuntimeError) as exc:
        code = getattr(exc, "code", "E_INTERNAL")
        sys.stderr.write(error_document(code, str(exc)))
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
