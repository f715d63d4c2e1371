import numpy as np
import pytest

from trainclean.data import Dataset, FeatureSpec, generate_two_cluster
from trainclean.learners import (ALGORITHMS, LearnerError, LearnerSpec, default_hyperparameters,
                                 hyperparameter_space, predict, predict_many, train)
from trainclean.learners.encoding import Schema
from trainclean.learners.space import UNLIMITED, HyperparameterError
from trainclean.learners.tree import DecisionTree, RandomForest

from conftest import make_dataset

MIXED = make_dataset(n=60, d=4, n_classes=3, nominal=(3,), missing=0.05, seed=2)


def test_declared_defaults():
    assert default_hyperparameters("knn") == {
        "k": 5, "weighting": "uniform", "distance": "mixed-euclidean-overlap"}
    rf = default_hyperparameters("random_forest")
    assert (rf["trees"], rf["max_depth"], rf["features_per_split"]) == (50, UNLIMITED, "sqrt")
    dt = default_hyperparameters("decision_tree")
    assert (dt["min_leaf"], dt["pruning"], dt["confidence"]) == (2, "on", 0.25)


def _bounds(algorithm):
    return {p.name: (p.kind, p.low, p.high, p.choices) for p in hyperparameter_space(algorithm).params
            if not p.fixed}


def test_space_table():
    assert _bounds("knn") == {"k": ("int", 1, 25, None),
                              "weighting": ("categorical", None, None, ("uniform", "inverse-distance"))}
    mlp = _bounds("mlp")
    assert mlp["hidden_units"][:3] == ("int", 2, 64)
    assert mlp["learning_rate"][:3] == ("log-real", 1e-4, 1e-1)
    assert mlp["epochs"][:3] == ("int", 10, 500)
    assert mlp["momentum"][:3] == ("real", 0, 0.9)
    rl = _bounds("rule_learner")
    assert rl["min_coverage"][:3] == ("int", 1, 10) and rl["pruning"][3] == ("on", "off")
    lg = _bounds("logistic")
    assert lg["l2"][:3] == ("log-real", 1e-6, 10) and lg["learning_rate"][:3] == ("log-real", 1e-4, 1)
    rf = _bounds("random_forest")
    assert rf["trees"][:3] == ("int", 10, 200) and rf["features_per_split"][3] == ("sqrt", "log2", "all")


@pytest.mark.parametrize("algorithm", ALGORITHMS)
def test_space_draws_validate(algorithm):
    space = hyperparameter_space(algorithm)
    rng = np.random.default_rng(0)
    for _ in range(50):
        a = space.draw(rng)
        assert space.validate(a) == a


def test_validation_errors():
    with pytest.raises(HyperparameterError):
        LearnerSpec.of("knn", {"k": 0})
    with pytest.raises(HyperparameterError):
        LearnerSpec.of("knn", {"weighting": "cosine"})
    with pytest.raises(HyperparameterError):
        LearnerSpec.of("knn", {"neighbours": 3})
    assert LearnerSpec.of("random_forest", {"max_depth": UNLIMITED}).hyperparameters["max_depth"] == UNLIMITED


def test_spec_serialisation_and_label():
    s = LearnerSpec.of("knn", {"k": 3})
    assert LearnerSpec.from_dict(s.to_dict()) == s
    assert s.label == "knn(k=3)" and LearnerSpec.default("knn").label == "knn"
    assert LearnerSpec.from_dict("mlp") == LearnerSpec.default("mlp")


@pytest.mark.parametrize("algorithm", ALGORITHMS)
def test_deterministic_closed_world_and_total(algorithm):
    a = train(algorithm, None, MIXED, seed=5)
    b = train(algorithm, None, MIXED, seed=5)
    pa, pb = predict_many(a, MIXED), predict_many(b, MIXED)
    assert np.array_equal(pa, pb)
    assert pa.min() >= 0 and pa.max() < MIXED.n_classes
    # trained on only two of three classes -> never predicts the third
    sub = MIXED.take(np.flatnonzero(MIXED.y != 2))
    m = train(algorithm, None, sub, seed=1)
    assert set(predict_many(m, MIXED)) <= {0, 1}
    assert predict(m, MIXED.instances[0]) in (0, 1)


@pytest.mark.parametrize("algorithm", ALGORITHMS)
def test_single_class_training_is_constant(algorithm):
    sub = MIXED.take(np.flatnonzero(MIXED.y == 1))
    m = train(algorithm, None, sub, seed=0)
    assert set(predict_many(m, MIXED)) == {1}


def test_empty_training_and_schema_mismatch():
    with pytest.raises(LearnerError):
        train("knn", None, MIXED.take([]), seed=0)
    m = train("knn", None, MIXED, seed=0)
    with pytest.raises(LearnerError):
        predict(m, (1.0, 2.0))
    with pytest.raises(LearnerError):
        predict_many(m, np.zeros((2, 7)))


def test_naive_bayes_two_instances():
    ds = Dataset([FeatureSpec("x", "numeric"), FeatureSpec("c", "nominal", ("u", "v"))],
                 ("p", "n"), [[0.0, 0], [4.0, 1]], [0, 1])
    m = train("naive_bayes", None, ds, seed=0)
    assert list(predict_many(m, ds)) == [0, 1]


def test_one_nn_memorises():
    ds = make_dataset(n=50, d=3, n_classes=3, seed=9)
    m = train("knn", {"k": 1}, ds, seed=0)
    assert np.array_equal(predict_many(m, ds), ds.y)


def test_knn_probe_equal_to_training_instance():
    m = train("knn", {"k": 1}, MIXED, seed=0)
    inst = MIXED.instances[7]
    assert predict(m, inst) == inst.label


def test_knn_vote_tie_goes_to_lower_class():
    ds = Dataset([FeatureSpec("x", "numeric")], ("a", "b"), [[-1.0], [1.0]], [1, 0])
    m = train("knn", {"k": 2}, ds, seed=0)
    assert predict(m, (0.0,)) == 0


def test_naive_bayes_order_invariant():
    perm = np.random.default_rng(0).permutation(len(MIXED))
    for model in ("gaussian", "histogram-10bin"):
        a = train("naive_bayes", {"numeric_model": model}, MIXED, seed=0)
        b = train("naive_bayes", {"numeric_model": model}, MIXED.take(perm), seed=0)
        assert np.array_equal(predict_many(a, MIXED), predict_many(b, MIXED))


def test_single_tree_forest_equals_decision_tree():
    ds = make_dataset(n=80, d=4, n_classes=3, nominal=(2,), missing=0.05, seed=6)
    schema = Schema.of(ds)
    rf = RandomForest(ds.X, ds.y, 3, schema, {"trees": 1, "bootstrap": False,
                                              "features_per_split": "all", "max_depth": UNLIMITED}, 0)
    dt = DecisionTree(ds.X, ds.y, 3, schema, {"min_leaf": 1, "pruning": "off", "confidence": 0.25})
    probe = make_dataset(n=200, d=4, n_classes=3, nominal=(2,), missing=0.1, seed=7)
    assert np.array_equal(rf.predict(probe.X), dt.predict(probe.X))


def test_mlp_separable_clusters():
    ds = generate_two_cluster(40, 0.0, 0, seed=0)
    m = train("mlp", None, ds, seed=0)
    assert predict(m, (-1.0, 0.0)) == 0 and predict(m, (1.0, 0.0)) == 1


@pytest.mark.parametrize("algorithm", ALGORITHMS)
def test_learners_beat_chance_on_easy_data(algorithm):
    ds = generate_two_cluster(40, 0.2, 0, seed=3)
    m = train(algorithm, None, ds, seed=0)
    assert np.mean(predict_many(m, ds) == ds.y) > 0.9
