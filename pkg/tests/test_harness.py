import json

import numpy as np
import pytest

from trainclean.data import generate_two_cluster, write_arff
from trainclean.harness import (CONDITIONS, ComparisonReport, ConfigError, ExperimentConfig,
                                build_report, emit_report, read_cells_csv, render_markdown,
                                run_experiment)

SMALL = dict(targets=["knn"], runs=1, folds=3, hpo_trials=2, phi_grid=[0.5, 0.3],
             candidates=["knn", "naive_bayes", "decision_tree"])


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus")
    paths = []
    for s in range(5):
        p = d / f"g{s}.arff"
        write_arff(generate_two_cluster(15, 0.5, 2, seed=s), p)
        paths.append(str(p))
    return paths


@pytest.fixture(scope="module")
def full_report(corpus):
    return run_experiment(ExperimentConfig(corpus=corpus, **SMALL))


def test_orig_only_has_no_stats(corpus):
    rep = run_experiment(ExperimentConfig(corpus=corpus[:2], conditions=["orig"], **SMALL))
    assert rep.comparisons == [] and len(rep.cells) == 2
    assert all(c["condition"] == "orig" and c["accuracy"] is not None for c in rep.cells)


def test_adaptive_never_below_orig(full_report):
    orig = full_report.accuracy("orig")
    for cond in ("adaptive_orig", "adaptive_hpo"):
        base = orig if cond == "adaptive_orig" else full_report.accuracy("hpo")
        for name, acc in full_report.accuracy(cond).items():
            assert acc >= base[name]


def test_phi_max_reporting(full_report):
    for c in full_report.cells:
        if c["per_phi"]:
            vals = [v for v in c["per_phi"].values() if v is not None]
            assert c["accuracy"] == max(vals)
            assert c["per_phi"][repr(c["phi"])] == c["accuracy"]


def test_selection_frequency_consistency(full_report):
    for cond, table in full_report.selection_frequency.items():
        for col in ["ALL", "knn"]:
            total = sum(v[col] for v in table["learners"].values())
            assert total >= 1 - table["none"][col] - 1e-12


def test_baselines_present(full_report):
    conds = {c["condition"] for c in full_report.cells}
    for cmp in full_report.comparisons:
        assert cmp["baseline"] in conds and cmp["n"] == 5
        assert cmp["wilcoxon"] is not None


def test_round_trips(full_report, tmp_path):
    emit_report(full_report, tmp_path)
    cells = read_cells_csv(tmp_path / "cells.csv")
    for a, b in zip(cells, full_report.cells):
        for k, v in a.items():
            if isinstance(v, float):
                assert v == pytest.approx(b[k], abs=1e-9)
            else:
                assert v == b[k]
    back = ComparisonReport.from_dict(json.loads((tmp_path / "report.json").read_text()))
    assert back.to_dict() == json.loads((tmp_path / "report.json").read_text())
    rebuilt = build_report(full_report.config, full_report.candidates, cells)
    for cond, per in full_report.means.items():
        assert rebuilt.means[cond] == pytest.approx(per, abs=1e-9)


def test_markdown_layout():
    cells = [{"dataset_index": 0, "dataset": "d", "target": "mlp", "condition": c,
              "accuracy": a, "phi": None, "per_phi": None, "filter_ensemble": None,
              "params": None, "error": None}
             for c, a in (("orig", 0.8074), ("l_filter", 0.8353))]
    config = {"targets": ["mlp"], "conditions": ["orig", "l_filter"]}
    md = render_markdown(build_report(config, [], cells))
    assert "| count |  | 1,0,0 |" in md
    assert "| accuracy | 80.74 | 83.53 |" in md
    header = next(l for l in md.splitlines() if l.startswith("| target |"))
    assert header.count("|") - 2 == len(config["conditions"])


def test_jobs_do_not_change_output(corpus, full_report, tmp_path):
    par = run_experiment(ExperimentConfig(corpus=corpus, **SMALL), jobs=2)
    assert par.to_dict() == full_report.to_dict()


def test_failures_are_isolated(corpus):
    from trainclean.learners import register_learner
    from trainclean.learners.space import HyperparameterSpace

    class Boom:
        def __init__(self, *a):
            raise RuntimeError("boom")

    register_learner("boom", Boom, HyperparameterSpace("boom", []))
    cfg = dict(SMALL, candidates=["boom"], conditions=["orig", "l_filter"])
    rep = run_experiment(ExperimentConfig(corpus=corpus[:2], **cfg))
    bad = [c for c in rep.cells if c["condition"] == "l_filter"]
    assert all(c["error"] and c["accuracy"] is None for c in bad)
    assert all(c["accuracy"] is not None for c in rep.cells if c["condition"] == "orig")


def test_config_from_toml(tmp_path, monkeypatch, corpus):
    p = tmp_path / "c.toml"
    p.write_text('corpus = ["bundled:iris", "rel.arff"]\nseed = 4\n')
    cfg = ExperimentConfig.from_toml(p)
    assert cfg.seed == 4 and cfg.corpus[1] == str(tmp_path / "rel.arff")
    assert cfg.corpus[0].endswith("iris.arff")
    assert cfg.conditions == list(CONDITIONS) and cfg.phi_grid == [0.5, 0.3, 0.1]
    monkeypatch.setenv("TRAINCLEAN_SEED", "9")
    assert ExperimentConfig.from_toml(p).seed == 9
    p.write_text('corpus = ["x.arff"]\nbogus = 1\n')
    with pytest.raises(ConfigError):
        ExperimentConfig.from_toml(p)


@pytest.mark.parametrize("bad", [
    dict(corpus=[]), dict(conditions=[]), dict(conditions=["nope"]), dict(phi_grid=[0.0]),
    dict(phi_grid=[1.2]), dict(targets=["svm"]), dict(hpo_trials=0), dict(candidates="some"),
])
def test_config_validation(bad):
    kw = dict(corpus=["x.arff"])
    kw.update(bad)
    with pytest.raises(ConfigError):
        ExperimentConfig(**kw)


@pytest.mark.parametrize("name", ["bundled.toml", "quick.toml"])
def test_shipped_configs_parse(name):
    from pathlib import Path

    cfg = ExperimentConfig.from_toml(Path(__file__).parents[1] / "configs" / name)
    assert all(Path(p).exists() for p in cfg.corpus)
