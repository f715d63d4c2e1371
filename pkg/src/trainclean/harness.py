"""End-to-end comparison of filtering and hyper-parameter optimisation.

For every (dataset, target) the requested conditions are evaluated under
one shared cross-validation partition per dataset, so all conditions of a
dataset are paired. Conditions:

``orig``           target at default hyper-parameters
``hpo``            best of a random search over the target's space
``l_filter``       target trained on data filtered by the whole candidate roster
``l_filter_hpo``   same, with every roster member tuned on the dataset first
``adaptive_orig``  greedy adaptive filter built from the default roster
``adaptive_hpo``   greedy adaptive filter with tuned target and tuned roster

Filtered conditions report the best accuracy over the ``phi`` grid and
record which ``phi`` won.
"""
from __future__ import annotations

import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .cv import EmptyTrainingSplit, EvalCache, Protocol, cv_accuracy
from .data import load_dataset
from .diversity import agglomerate, cod_matrix, cut_and_select
from .filtering import adaptive_filter, run_la
from .hpo import random_search
from .learners import ALGORITHMS, LearnerSpec, hyperparameter_space
from .seeding import derive_seed
from .stats import PairedResults, reduction_metrics, wilcoxon

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger(__name__)

CONDITIONS = ("orig", "hpo", "l_filter", "l_filter_hpo", "adaptive_orig", "adaptive_hpo")
COMPARISONS = (
    ("orig", ("l_filter", "hpo")),
    ("hpo", ("l_filter", "l_filter_hpo", "adaptive_orig", "adaptive_hpo")),
)
ADAPTIVE = ("adaptive_orig", "adaptive_hpo")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    corpus: list[str]
    targets: list[str] = field(default_factory=lambda: ["knn", "decision_tree", "naive_bayes"])
    conditions: list[str] = field(default_factory=lambda: list(CONDITIONS))
    phi_grid: list[float] = field(default_factory=lambda: [0.5, 0.3, 0.1])
    runs: int = 5
    folds: int = 10
    seed: int = 0
    hpo_trials: int = 10
    candidates: object = "roster"
    cut_height: float = 0.18
    linkage: str = "average"

    def __post_init__(self):
        if not self.corpus:
            raise ConfigError("corpus must not be empty")
        if not self.conditions:
            raise ConfigError("conditions must not be empty")
        bad = [c for c in self.conditions if c not in CONDITIONS]
        if bad:
            raise ConfigError(f"unknown condition(s) {bad}")
        self.conditions = [c for c in CONDITIONS if c in self.conditions]
        for t in self.targets:
            if t not in ALGORITHMS:
                raise ConfigError(f"unknown target algorithm {t!r}")
        if not self.targets:
            raise ConfigError("targets must not be empty")
        if not self.phi_grid or any(not 0.0 < p <= 1.0 for p in self.phi_grid):
            raise ConfigError("phi values must lie in (0, 1]")
        if self.hpo_trials < 1:
            raise ConfigError("hpo_trials must be >= 1")
        if not (isinstance(self.candidates, list) or self.candidates in ("roster", "auto-cod")):
            raise ConfigError("candidates must be 'roster', 'auto-cod' or a list of learner specs")
        if isinstance(self.candidates, list):
            try:
                [LearnerSpec.from_dict(c) for c in self.candidates]
            except Exception as exc:
                raise ConfigError(f"bad candidate spec: {exc}") from None
        Protocol(self.runs, self.folds, self.seed)

    @classmethod
    def from_toml(cls, path) -> "ExperimentConfig":
        path = Path(path)
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
        known = {f for f in cls.__dataclass_fields__}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"unknown config key(s): {unknown}")
        if "corpus" not in raw:
            raise ConfigError("config needs a corpus")
        raw["corpus"] = [_resolve(p, path.parent) for p in raw["corpus"]]
        env = os.environ.get("TRAINCLEAN_SEED")
        if env is not None:
            raw["seed"] = int(env)
        return cls(**raw)

    def to_dict(self) -> dict:
        return asdict(self)


def _resolve(entry: str, base: Path) -> str:
    if entry.startswith("bundled:"):
        from .corpus import bundled_path
        return str(bundled_path(entry.split(":", 1)[1]))
    p = Path(entry)
    return str(p if p.is_absolute() else (base / p))


# ---------------------------------------------------------------- running


def candidate_roster(config: ExperimentConfig, datasets=None) -> list[LearnerSpec]:
    if isinstance(config.candidates, list):
        return [LearnerSpec.from_dict(c) for c in config.candidates]
    full = [LearnerSpec.default(a) for a in ALGORITHMS]
    if config.candidates == "roster":
        return full
    datasets = datasets if datasets is not None else [load_dataset(p) for p in config.corpus]
    proto = Protocol(config.runs, config.folds, derive_seed(config.seed, "cod"))
    matrix = cod_matrix(full, datasets, proto)
    return cut_and_select(agglomerate(matrix, config.linkage), config.cut_height, matrix)


def _best_over_phi(phi_grid, evaluate):
    per_phi, extra = {}, {}
    for phi in phi_grid:
        try:
            acc, info = evaluate(phi)
        except EmptyTrainingSplit as exc:
            log.info("phi=%s infeasible: %s", phi, exc)
            acc, info = None, None
        per_phi[repr(float(phi))] = acc
        extra[repr(float(phi))] = info
    scored = [(a, k) for k, a in per_phi.items() if a is not None]
    if not scored:
        raise EmptyTrainingSplit("every phi empties a training split")
    best_acc = max(a for a, _ in scored)
    best_key = next(k for a, k in scored if a == best_acc)
    return best_acc, float(best_key), per_phi, extra[best_key]


def _dataset_cells(config: ExperimentConfig, d_index: int, path: str, roster_dicts) -> list[dict]:
    dataset = load_dataset(path)
    name = dataset.name or Path(path).stem
    roster = [LearnerSpec.from_dict(d) for d in roster_dicts]
    protocol = Protocol(config.runs, config.folds, derive_seed(config.seed, d_index, "shared", "cv"))
    cache = EvalCache()
    tuned: dict[str, object] = {}

    def tune(algorithm):
        if algorithm not in tuned:
            tuned[algorithm] = random_search(algorithm, dataset, config.hpo_trials, protocol, cache)
        return tuned[algorithm]

    def tuned_roster():
        return [tune(s.algorithm).best_spec if hyperparameter_space(s.algorithm).params else s
                for s in roster]

    cells = []
    for target in config.targets:
        default = LearnerSpec.default(target)
        for cond in config.conditions:
            cell = {"dataset_index": d_index, "dataset": name, "target": target,
                    "condition": cond, "accuracy": None, "phi": None, "per_phi": None,
                    "filter_ensemble": None, "params": None, "error": None}
            try:
                if cond == "orig":
                    cell["accuracy"] = cv_accuracy(default, dataset, protocol, cache)
                    cell["params"] = default.hyperparameters
                elif cond == "hpo":
                    res = tune(target)
                    cell["accuracy"] = res.best_accuracy
                    cell["params"] = res.best_params
                elif cond in ("l_filter", "l_filter_hpo"):
                    ens = roster if cond == "l_filter" else tuned_roster()
                    acc, phi, per_phi, _ = _best_over_phi(
                        config.phi_grid,
                        lambda p: (run_la(dataset, default, ens, p, protocol, cache), None))
                    cell.update(accuracy=acc, phi=phi, per_phi=per_phi,
                                filter_ensemble=[s.algorithm for s in ens],
                                params=default.hyperparameters)
                else:
                    tgt = default if cond == "adaptive_orig" else tune(target).best_spec
                    pool = roster if cond == "adaptive_orig" else tuned_roster()
                    index = {id(s): k for k, s in enumerate(pool)}

                    def adapt(p):
                        out = adaptive_filter(dataset, tgt, pool, p, protocol, cache)
                        return out.final_accuracy, [roster[index[id(s)]].label for s in out.ensemble]

                    acc, phi, per_phi, chosen = _best_over_phi(config.phi_grid, adapt)
                    cell.update(accuracy=acc, phi=phi, per_phi=per_phi,
                                filter_ensemble=chosen, params=tgt.hyperparameters)
            except Exception as exc:  # one failing cell must not abort the run
                log.warning("%s/%s/%s failed: %s", name, target, cond, exc)
                cell["error"] = f"{type(exc).__name__}: {exc}"
            cells.append(cell)
    return cells


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> "ComparisonReport":
    """Run every requested condition on every (dataset, target) pair."""
    roster = candidate_roster(config)
    roster_dicts = [s.to_dict() for s in roster]
    tasks = list(enumerate(config.corpus))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(jobs) as pool:
            parts = list(pool.map(_dataset_cells, [config] * len(tasks),
                                  [i for i, _ in tasks], [p for _, p in tasks],
                                  [roster_dicts] * len(tasks)))
    else:
        parts = [_dataset_cells(config, i, p, roster_dicts) for i, p in tasks]
    cells = [c for part in parts for c in part]
    order = {c: k for k, c in enumerate(CONDITIONS)}
    tpos = {t: k for k, t in enumerate(config.targets)}
    cells.sort(key=lambda c: (c["dataset_index"], tpos[c["target"]], order[c["condition"]]))
    return build_report(config.to_dict(), [s.label for s in roster], cells)


# ---------------------------------------------------------------- report


@dataclass
class ComparisonReport:
    config: dict
    candidates: list[str]
    cells: list[dict]
    comparisons: list[dict]
    means: dict
    selection_frequency: dict

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "candidates": self.candidates,
            "cells": self.cells,
            "means": self.means,
            "comparisons": self.comparisons,
            "selection_frequency": self.selection_frequency,
        }

    @classmethod
    def from_dict(cls, d) -> "ComparisonReport":
        return build_report(d["config"], d["candidates"], d["cells"])

    def accuracy(self, condition, target=None) -> dict[str, float]:
        """Per-dataset accuracy (fraction) for one condition."""
        return {c["dataset"]: c["accuracy"] for c in self.cells
                if c["condition"] == condition and (target is None or c["target"] == target)
                and c["accuracy"] is not None}


def _index(cells):
    out = {}
    for c in cells:
        out[(c["target"], c["condition"], c["dataset_index"])] = c
    return out


def build_report(config: dict, candidates: list[str], cells: list[dict]) -> ComparisonReport:
    """Derive every aggregate from the per-dataset cells."""
    idx = _index(cells)
    targets = list(config["targets"])
    conditions = [c for c in CONDITIONS if c in config["conditions"]]
    datasets = sorted({c["dataset_index"] for c in cells})

    means = {}
    for cond in conditions:
        means[cond] = {}
        for t in targets:
            vals = [idx[(t, cond, d)]["accuracy"] for d in datasets
                    if (t, cond, d) in idx and idx[(t, cond, d)]["accuracy"] is not None]
            means[cond][t] = 100.0 * float(np.mean(vals)) if vals else None

    comparisons = []
    for baseline, treatments in COMPARISONS:
        if baseline not in conditions:
            continue
        for treat in treatments:
            if treat not in conditions:
                continue
            for t in targets:
                names, pairs = [], []
                for d in datasets:
                    b, g = idx.get((t, baseline, d)), idx.get((t, treat, d))
                    if b and g and b["accuracy"] is not None and g["accuracy"] is not None:
                        names.append(b["dataset"])
                        pairs.append((100.0 * b["accuracy"], 100.0 * g["accuracy"]))
                if not pairs:
                    continue
                paired = PairedResults.from_pairs(pairs, names)
                red = reduction_metrics(paired)
                verdict = wilcoxon(paired) if len(pairs) >= 5 else None
                comparisons.append({
                    "baseline": baseline,
                    "treatment": treat,
                    "target": t,
                    "n": len(pairs),
                    "baseline_mean": float(np.mean([b for b, _ in pairs])),
                    "treatment_mean": float(np.mean([g for _, g in pairs])),
                    **red.to_dict(),
                    "wilcoxon": verdict.to_dict() if verdict else None,
                })

    selection = {}
    for cond in ADAPTIVE:
        if cond not in conditions:
            continue
        table = {"cases": {}, "none": {}, "learners": {c: {} for c in candidates}}
        tot_cases = tot_none = 0
        tot_sel = {c: 0 for c in candidates}
        for t in targets:
            chosen = [idx[(t, cond, d)]["filter_ensemble"] for d in datasets
                      if (t, cond, d) in idx and idx[(t, cond, d)]["accuracy"] is not None]
            n = len(chosen)
            none = sum(1 for f in chosen if not f)
            table["cases"][t] = n
            table["none"][t] = none / n if n else None
            for c in candidates:
                k = sum(1 for f in chosen if f and c in f)
                table["learners"][c][t] = k / n if n else None
                tot_sel[c] += k
            tot_cases += n
            tot_none += none
        table["cases"]["ALL"] = tot_cases
        table["none"]["ALL"] = tot_none / tot_cases if tot_cases else None
        for c in candidates:
            table["learners"][c]["ALL"] = tot_sel[c] / tot_cases if tot_cases else None
        selection[cond] = table
    return ComparisonReport(config, list(candidates), cells, comparisons, means, selection)


# ---------------------------------------------------------------- output

CSV_FIELDS = ["dataset_index", "dataset", "target", "condition", "accuracy", "phi",
              "per_phi", "filter_ensemble", "params", "error"]


def _num(v):
    return "" if v is None else repr(float(v))


def write_cells_csv(cells, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_FIELDS)
        for c in cells:
            w.writerow([
                c["dataset_index"], c["dataset"], c["target"], c["condition"],
                _num(c["accuracy"]), _num(c["phi"]),
                "" if c["per_phi"] is None else json.dumps(c["per_phi"]),
                "" if c["filter_ensemble"] is None else json.dumps(c["filter_ensemble"]),
                "" if c["params"] is None else json.dumps(c["params"], sort_keys=True),
                c["error"] or "",
            ])


def read_cells_csv(path) -> list[dict]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append({
                "dataset_index": int(row["dataset_index"]),
                "dataset": row["dataset"],
                "target": row["target"],
                "condition": row["condition"],
                "accuracy": float(row["accuracy"]) if row["accuracy"] else None,
                "phi": float(row["phi"]) if row["phi"] else None,
                "per_phi": json.loads(row["per_phi"]) if row["per_phi"] else None,
                "filter_ensemble": (json.loads(row["filter_ensemble"])
                                    if row["filter_ensemble"] else None),
                "params": json.loads(row["params"]) if row["params"] else None,
                "error": row["error"] or None,
            })
    return out


def _fmt(v, digits=2):
    return "NA" if v is None else f"{v:.{digits}f}"


def render_markdown(report: ComparisonReport) -> str:
    lines = ["# Filtering vs hyper-parameter optimisation", ""]
    targets = report.config["targets"]
    conditions = [c for c in CONDITIONS if c in report.config["conditions"]]
    lines += ["## Mean accuracy", "", "| target | " + " | ".join(conditions) + " |",
              "|---|" + "---|" * len(conditions)]
    for t in targets:
        lines.append(f"| {t} | " + " | ".join(_fmt(report.means[c].get(t)) for c in conditions) + " |")
    lines.append("")
    for baseline, treatments in COMPARISONS:
        treats = [t for t in treatments if t in conditions]
        if baseline not in conditions or not treats:
            continue
        lines += [f"## Compared against `{baseline}`", ""]
        for t in targets:
            cols = [baseline] + treats
            rows = {k: [] for k in ("accuracy", "%red_err", "%red_acc", "count")}
            for cond in cols:
                mean = report.means.get(cond, {}).get(t)
                if cond == baseline:
                    rows["accuracy"].append(_fmt(mean))
                    for k in ("%red_err", "%red_acc", "count"):
                        rows[k].append("")
                    continue
                cmp = next((c for c in report.comparisons if c["baseline"] == baseline
                            and c["treatment"] == cond and c["target"] == t), None)
                sig = (cmp and cmp["wilcoxon"] and cmp["wilcoxon"]["significant"]
                       and cmp["wilcoxon"]["direction"] == "treatment")
                rows["accuracy"].append(_fmt(mean) + (" *" if sig else ""))
                rows["%red_err"].append(_fmt(cmp["red_err"]) if cmp else "NA")
                rows["%red_acc"].append(_fmt(cmp["red_acc"]) if cmp else "NA")
                rows["count"].append(",".join(map(str, cmp["counts"])) if cmp else "NA")
            lines.append(f"### {t}")
            lines.append("")
            lines.append("| | " + " | ".join(cols) + " |")
            lines.append("|---|" + "---|" * len(cols))
            for k, vals in rows.items():
                lines.append(f"| {k} | " + " | ".join(vals) + " |")
            lines.append("")
    lines.append("`*` marks a significant increase (two-sided Wilcoxon signed-ranks, alpha 0.05).")
    lines.append("")
    for cond, table in report.selection_frequency.items():
        cols = ["ALL"] + targets
        lines += [f"## Filter selection frequency (`{cond}`, % of cases)", ""]
        lines.append("| | " + " | ".join(cols) + " |")
        lines.append("|---|" + "---|" * len(cols))

        def pct(v):
            return "NA" if v is None else f"{100 * v:.2f}"

        lines.append("| None | " + " | ".join(pct(table["none"][c]) for c in cols) + " |")
        for learner, vals in table["learners"].items():
            lines.append(f"| {learner} | " + " | ".join(pct(vals[c]) for c in cols) + " |")
        lines.append("")
    return "\n".join(lines)


def emit_report(report: ComparisonReport, out_dir, formats=("json", "csv", "markdown")) -> list[Path]:
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out_dir}: {exc}") from exc
    written = []
    for fmt in formats:
        if fmt == "json":
            p = out_dir / "report.json"
            p.write_text(json.dumps(report.to_dict(), indent=2) + "\n")
        elif fmt == "csv":
            p = out_dir / "cells.csv"
            write_cells_csv(report.cells, p)
        elif fmt == "markdown":
            p = out_dir / "report.md"
            p.write_text(render_markdown(report))
        else:
            raise ValueError(f"unknown report format {fmt!r}")
        written.append(p)
    return written
