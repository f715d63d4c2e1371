import numpy as np
import pytest

from trainclean.data import NOMINAL, NUMERIC, Dataset, FeatureSpec


def make_dataset(n=40, d=3, n_classes=2, seed=0, nominal=(), missing=0.0, name="toy"):
    """Random numeric/nominal dataset with a learnable signal in column 0."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    y = np.arange(n) % n_classes
    X[:, 0] += 2.0 * y
    feats = []
    for j in range(d):
        if j in nominal:
            X[:, j] = (np.abs(X[:, j]).astype(int) + y) % 3
            feats.append(FeatureSpec(f"f{j}", NOMINAL, ("a", "b", "c")))
        else:
            feats.append(FeatureSpec(f"f{j}", NUMERIC))
    if missing:
        X[rng.random(X.shape) < missing] = np.nan
    classes = tuple(f"c{k}" for k in range(n_classes))
    return Dataset(feats, classes, X, y, name=name)


@pytest.fixture
def toy():
    return make_dataset()


@pytest.fixture(scope="session")
def two_cluster():
    from trainclean.data import generate_two_cluster
    return generate_two_cluster(30, 0.3, 3, seed=1)


# acceptance criteria report one summary line each; printed after the run
ACCEPTANCE: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> bool:
    ACCEPTANCE[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
