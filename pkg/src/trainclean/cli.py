"""Command-line entry point: ``trainclean <command> ...``.

Learners are written ``name`` or ``name:key=value,key=value``; values are
parsed as JSON where possible (``k=3``, ``bootstrap=true``) and as plain
strings otherwise (``weighting=uniform``). Several learners may be joined
with ``;`` or read from a JSON list of specs such as the ``selection.json``
written by ``cod``. Every command writes its outputs
deterministically, so repeated runs with the same seed are byte-identical.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .cv import EvalCache, Protocol
from .data import DatasetError, generate_two_cluster, load_dataset, write_arff, write_csv
from .diversity import agglomerate, cod_matrix, cut_and_select, write_selection
from .filtering import adaptive_filter, ensemble_filter
from .hardness import estimate_hardness, write_hardness
from .harness import ExperimentConfig, emit_report, run_experiment
from .hpo import random_search
from .learners import ALGORITHMS, LearnerSpec
from .stats import format_column, paired_from_rows, reduction_metrics, wilcoxon

log = logging.getLogger("trainclean")


def parse_learner(text: str) -> LearnerSpec:
    name, _, rest = text.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, sep, raw = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected key=value in {text!r}")
        try:
            params[key.strip()] = json.loads(raw)
        except json.JSONDecodeError:
            params[key.strip()] = raw.strip()
    try:
        return LearnerSpec.of(name.strip(), params)
    except Exception as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _learners(items, default_roster=False):
    if not items:
        return [LearnerSpec.default(a) for a in ALGORITHMS] if default_roster else []
    out = []
    for item in items:
        if item.endswith(".json") and Path(item).is_file():
            out.extend(LearnerSpec.from_dict(d) for d in json.loads(Path(item).read_text()))
        else:
            out.extend(parse_learner(t) for t in item.split(";") if t)
    return out


def _dump(obj, path) -> None:
    text = json.dumps(obj, indent=2, sort_keys=False) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _protocol(args) -> Protocol:
    return Protocol(args.runs, args.folds, args.seed)


def _write_retained(dataset, path) -> None:
    if str(path).endswith(".csv"):
        write_csv(dataset, path)
    else:
        write_arff(dataset, path)


# ---------------------------------------------------------------- commands


def cmd_run(args) -> int:
    config = ExperimentConfig.from_toml(args.config)
    if args.seed is not None:
        config.seed = args.seed
    report = run_experiment(config, jobs=args.jobs)
    for p in emit_report(report, args.out, args.formats):
        log.info("wrote %s", p)
    return 0


def cmd_hardness(args) -> int:
    dataset = load_dataset(args.dataset)
    ensemble = _learners(args.ensemble, default_roster=True)
    est = estimate_hardness(dataset, ensemble, args.runs, args.folds, args.seed,
                            EvalCache(), jobs=args.jobs)
    out = Path(args.out)
    json_path = Path(args.provenance) if args.provenance else out.with_suffix(".json")
    write_hardness(est, dataset, out, json_path)
    return 0


def cmd_filter(args) -> int:
    dataset = load_dataset(args.dataset)
    ensemble = _learners(args.ensemble, default_roster=True)
    target = parse_learner(args.target) if args.target else None
    res = ensemble_filter(dataset, ensemble, args.phi, _protocol(args), target=target,
                          cache=EvalCache())
    _dump(res.to_dict(), args.out)
    if args.retained:
        _write_retained(res.retained, args.retained)
    return 0


def cmd_adaptive(args) -> int:
    dataset = load_dataset(args.dataset)
    candidates = _learners(args.candidates, default_roster=True)
    res = adaptive_filter(dataset, parse_learner(args.target), candidates, args.phi,
                          _protocol(args), EvalCache())
    _dump(res.to_dict(), args.out)
    if args.retained:
        _write_retained(res.retained, args.retained)
    return 0


def cmd_hpo(args) -> int:
    dataset = load_dataset(args.dataset)
    res = random_search(args.algorithm, dataset, args.trials, _protocol(args), EvalCache())
    _dump(res.to_dict(), args.out)
    return 0


def cmd_cod(args) -> int:
    corpus = [load_dataset(p) for p in args.datasets]
    learners = _learners(args.learners, default_roster=True)
    matrix = cod_matrix(learners, corpus, _protocol(args), EvalCache())
    dendro = agglomerate(matrix, args.linkage)
    chosen = cut_and_select(dendro, args.cut, matrix)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    matrix.write_csv(out / "cod_matrix.csv")
    _dump({**dendro.to_dict(matrix.labels), "linkage": args.linkage,
           "provenance": matrix.provenance}, out / "dendrogram.json")
    write_selection(chosen, out / "selection.json")
    return 0


def cmd_stats(args) -> int:
    rows = []
    with open(args.csv, newline="") as fh:
        for row in csv.DictReader(fh):
            try:
                rows.append((row["dataset"], float(row["baseline"]), float(row["treatment"])))
            except (KeyError, ValueError) as exc:
                raise DatasetError(f"{args.csv}: need dataset,baseline,treatment columns ({exc})")
    if not rows:
        raise DatasetError(f"{args.csv}: no rows")
    pairs = paired_from_rows(rows)
    summary = reduction_metrics(pairs)
    verdict = wilcoxon(pairs, args.alpha) if len(pairs) >= 5 else None
    mean_t = sum(pairs.treatment) / len(pairs)
    _dump({
        "n": len(pairs),
        "mean_baseline": sum(pairs.baseline) / len(pairs),
        "mean_treatment": mean_t,
        "reduction": summary.to_dict(),
        "wilcoxon": verdict.to_dict() if verdict else None,
    }, args.out)
    if args.text:
        Path(args.text).write_text(format_column(args.label, mean_t, summary, verdict) + "\n")
    return 0


def cmd_gen(args) -> int:
    ds = generate_two_cluster(args.n_per_class, args.overlap, args.n_detrimental, args.seed)
    write_arff(ds, args.out)
    side = Path(args.out).with_suffix(".json")
    _dump({"detrimental_ids": ds.metadata["detrimental_ids"], "n_per_class": args.n_per_class,
           "overlap": args.overlap, "seed": args.seed}, side)
    return 0


# ---------------------------------------------------------------- parser


def _cv_args(p, runs=5, folds=10):
    p.add_argument("--runs", type=int, default=runs)
    p.add_argument("--folds", type=int, default=folds)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="trainclean", description="Instance-hardness filtering and hyper-parameter search for tabular classifiers.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a configured comparison experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--formats", nargs="+", default=["json", "csv", "markdown"],
                   choices=["json", "csv", "markdown"])
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("hardness", help="estimate instance hardness")
    p.add_argument("dataset")
    p.add_argument("--ensemble", action="append", help="learner(s); default: full roster")
    p.add_argument("--out", required=True, help="CSV path")
    p.add_argument("--provenance", help="JSON sidecar (default: CSV path with .json)")
    p.add_argument("--jobs", type=int, default=1)
    _cv_args(p)
    p.set_defaults(func=cmd_hardness)

    p = sub.add_parser("filter", help="ensemble filter at a fixed phi")
    p.add_argument("dataset")
    p.add_argument("--ensemble", action="append")
    p.add_argument("--phi", type=float, default=0.5)
    p.add_argument("--target", help="also report this learner's accuracy before and after")
    p.add_argument("--out", default="-")
    p.add_argument("--retained", help="write the retained instances (.arff or .csv)")
    _cv_args(p)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("adaptive-filter", help="greedy adaptive filter for one target")
    p.add_argument("dataset")
    p.add_argument("--target", required=True)
    p.add_argument("--candidates", action="append")
    p.add_argument("--phi", type=float, default=0.5)
    p.add_argument("--out", default="-")
    p.add_argument("--retained")
    _cv_args(p)
    p.set_defaults(func=cmd_adaptive)

    p = sub.add_parser("hpo", help="random hyper-parameter search")
    p.add_argument("dataset")
    p.add_argument("--algorithm", required=True, choices=ALGORITHMS)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--out", default="-")
    _cv_args(p)
    p.set_defaults(func=cmd_hpo)

    p = sub.add_parser("cod", help="COD matrix, dendrogram and diverse selection")
    p.add_argument("datasets", nargs="+")
    p.add_argument("--learners", action="append")
    p.add_argument("--linkage", default="average", choices=["single", "complete", "average"])
    p.add_argument("--cut", type=float, default=0.18)
    p.add_argument("--out", required=True, help="output directory")
    _cv_args(p)
    p.set_defaults(func=cmd_cod)

    p = sub.add_parser("stats", help="reduction metrics and Wilcoxon test from a CSV")
    p.add_argument("csv", help="columns: dataset,baseline,treatment (percent)")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--label", default="treatment")
    p.add_argument("--out", default="-")
    p.add_argument("--text", help="also write a text summary block here")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("gen", help="synthetic two-cluster dataset with planted noise")
    p.add_argument("--n-per-class", type=int, default=100)
    p.add_argument("--overlap", type=float, default=0.5)
    p.add_argument("--n-detrimental", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="ARFF path; a .json sidecar lists planted ids")
    p.set_defaults(func=cmd_gen)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError, argparse.ArgumentTypeError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
