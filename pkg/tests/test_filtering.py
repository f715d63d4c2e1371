import numpy as np
import pytest

from trainclean.cv import EvalCache, Protocol, cv_accuracy, cv_predictions
from trainclean.data import Dataset, FeatureSpec, generate_two_cluster
from trainclean.filtering import (EXHAUSTIVE_CAP, FilterError, adaptive_filter, ensemble_filter,
                                  exhaustive_best_subset, run_la)
from trainclean.hardness import estimate_hardness
from trainclean.learners import LearnerSpec, roster

import test_hardness  # noqa: F401  registers the always_wrong stub
from test_hardness import ninety_ten

MAJ, MINO = LearnerSpec.default("majority"), LearnerSpec.default("minority")
KNN = LearnerSpec.default("knn")
NN1 = LearnerSpec.of("knn", {"k": 1})
P = Protocol(runs=2, folds=5, seed=0)


def test_strict_threshold_examples():
    ds = ninety_ten()
    out = ensemble_filter(ds, [MAJ], 0.1, P)
    assert out.removed_ids == frozenset(int(i) for i in ds.ids[ds.y == 1])
    assert list(out.retained.ids) == [int(i) for i in ds.ids[ds.y == 0]]
    # majority + minority stubs: every instance sits at exactly 0.5
    half = ensemble_filter(ds, [MAJ, MINO], 0.5, P)
    assert np.all(half.hardness.p_correct == 0.5) and not half.removed_ids


def test_all_correct_dataset_unchanged():
    ds = generate_two_cluster(20, 0.0, 0, seed=0)
    out = ensemble_filter(ds, [KNN], 1.0, P)
    assert not out.removed_ids and out.retained == ds


def test_filter_errors():
    ds = ninety_ten()
    for phi in (0.0, -0.1, 1.5):
        with pytest.raises(FilterError):
            ensemble_filter(ds, [MAJ], phi, P)
    with pytest.raises(FilterError):
        ensemble_filter(ds, [], 0.5, P)
    rng = np.random.default_rng(0)
    y = np.arange(30) % 2
    coded = Dataset([FeatureSpec("c", "numeric")], ("a", "b"), y[:, None] + 0.0, y)
    with pytest.raises(FilterError):
        ensemble_filter(coded, [LearnerSpec.default("always_wrong")], 0.5, P)
    with pytest.raises(FilterError):
        adaptive_filter(ds, KNN, [], 0.5, P)


def test_threshold_monotonicity():
    ds = generate_two_cluster(30, 0.5, 3, seed=2)
    est = estimate_hardness(ds, roster()[:4], runs=2, folds=5)
    removed = [set(ensemble_filter(ds, roster()[:4], phi, P, hardness=est).removed_ids)
               for phi in (0.1, 0.3, 0.5, 0.8, 1.0)]
    for a, b in zip(removed, removed[1:]):
        assert a <= b


def test_run_la_baselines():
    ds = generate_two_cluster(25, 0.5, 3, seed=1)
    cache = EvalCache()
    assert run_la(ds, KNN, [], 0.5, P, cache) == cv_accuracy(KNN, ds, P, cache)
    # constant classifier: filtering cannot change it
    nt = ninety_ten()
    assert run_la(nt, MAJ, [KNN], 0.5, P) == pytest.approx(0.9, abs=1e-12)
    assert run_la(nt, MAJ, [], 0.5, P) == pytest.approx(0.9, abs=1e-12)


def test_phi_below_resolution():
    ds = generate_two_cluster(25, 0.4, 0, seed=3)
    ens = [KNN, LearnerSpec.default("naive_bayes")]
    est = estimate_hardness(ds, ens, runs=P.runs, folds=P.folds, seed=P.seed)
    tiny = 0.5 / est.denominator
    if est.p_correct.min() > 0:
        assert run_la(ds, KNN, ens, tiny, P) == run_la(ds, KNN, [], tiny, P)
    # p = 0 instances are strictly below any positive phi and do get removed
    nt = ninety_ten()
    out = ensemble_filter(nt, [MAJ], 1e-6, P)
    assert len(out.removed_ids) == 10


def test_test_folds_never_filtered():
    ds = generate_two_cluster(25, 0.5, 3, seed=4)
    keep = np.ones(len(ds), dtype=bool)
    keep[::3] = False
    preds = cv_predictions(KNN, ds, P, keep, EvalCache())
    assert preds.shape == (P.runs, len(ds)) and preds.min() >= 0


def test_adaptive_no_improvement():
    nt = ninety_ten()
    out = adaptive_filter(nt, MAJ, [KNN, LearnerSpec.default("naive_bayes")], 0.5, P)
    assert out.ensemble == () and not out.removed_ids
    assert [acc for _, acc in out.trace] == [out.baseline_accuracy]


def test_adaptive_single_improving_candidate():
    ds = generate_two_cluster(30, 0.3, 4, seed=5)
    out = adaptive_filter(ds, NN1, [KNN], 0.5, P)
    assert out.final_accuracy > out.baseline_accuracy
    assert out.ensemble == (KNN,) and len(out.trace) == 2


def test_adaptive_planted_recovery():
    ds = generate_two_cluster(40, 0.5, 4, seed=0)
    out = adaptive_filter(ds, KNN, roster(), 0.5, Protocol())
    assert out.final_accuracy >= out.baseline_accuracy
    planted = set(ds.metadata["detrimental_ids"])
    assert len(planted & out.removed_ids) >= 6
    accs = [a for _, a in out.trace]
    assert all(b > a for a, b in zip(accs, accs[1:]))
    # final accuracy equals re-evaluating the chosen ensemble
    assert out.final_accuracy == run_la(ds, KNN, out.ensemble, 0.5, Protocol())


def test_adaptive_tie_prefers_earlier_candidate():
    ds = generate_two_cluster(30, 0.3, 4, seed=5)
    out = adaptive_filter(ds, NN1, [KNN, KNN], 0.5, P)
    assert len(out.ensemble) == 1


def _tiny(seed, n):
    rng = np.random.default_rng(seed)
    y = np.arange(n) % 2
    X = rng.normal(size=(n, 2)) + 1.5 * y[:, None]
    return Dataset([FeatureSpec("a", "numeric"), FeatureSpec("b", "numeric")], ("p", "q"), X, y)


def test_exhaustive_separable_keeps_everything():
    X = np.array([[0.0], [0.1], [0.2], [0.3], [1.0], [1.1], [1.2], [1.3]])
    ds = Dataset([FeatureSpec("x", "numeric")], ("a", "b"), X, [0, 0, 0, 0, 1, 1, 1, 1])
    ids, acc = exhaustive_best_subset(ds, NN1, Protocol(runs=1, folds=2))
    assert ids == frozenset(range(8)) and acc == 1.0


def test_exhaustive_excludes_contradictory_duplicate():
    X = np.array([[0.0], [0.2], [0.4], [0.6], [2.0], [2.2], [2.4], [2.6], [0.3]])
    y = [0, 0, 0, 0, 1, 1, 1, 1, 1]
    ds = Dataset([FeatureSpec("x", "numeric")], ("a", "b"), X, y)
    ids, _ = exhaustive_best_subset(ds, NN1, Protocol(runs=1, folds=3))
    assert 8 not in ids


def test_exhaustive_cap():
    with pytest.raises(FilterError):
        exhaustive_best_subset(_tiny(0, EXHAUSTIVE_CAP + 1), NN1)


@pytest.mark.parametrize("seed", range(4))
def test_oracle_dominance_small(seed):
    ds = _tiny(seed, 9)
    pr = Protocol(runs=1, folds=3, seed=seed)
    cache = EvalCache()
    _, best = exhaustive_best_subset(ds, NN1, pr, cache)
    ad = adaptive_filter(ds, NN1, roster()[:3], 0.5, pr, cache)
    try:
        ens = ensemble_filter(ds, roster()[:3], 0.5, pr, target=NN1, cache=cache).final_accuracy
    except Exception:
        ens = None
    assert best >= ad.final_accuracy >= ad.baseline_accuracy
    if ens is not None:
        assert best >= ens
