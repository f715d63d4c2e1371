"""Regenerate the bundled corpus in src/trainclean/corpus/.

Needs scikit-learn (for the iris, wine and breast-cancer tables); the
package itself does not.
"""
from pathlib import Path

import numpy as np
from sklearn import datasets as skd

from trainclean.data import NOMINAL, NUMERIC, Dataset, FeatureSpec, generate_two_cluster, write_arff

OUT = Path(__file__).resolve().parents[1] / "src" / "trainclean" / "corpus"
NOISE = 0.10


def plant_noise(X, y, n_classes, rng):
    y = y.copy()
    n_flip = int(round(NOISE * len(y)))
    flip = np.sort(rng.choice(len(y), n_flip, replace=False))
    for i in flip:
        y[i] = (y[i] + rng.integers(1, n_classes)) % n_classes
    return y, [int(i) for i in flip]


def numeric(names):
    return [FeatureSpec(n, NUMERIC) for n in names]


def from_sklearn(loader, name, rng, n_max=None, columns=None):
    b = loader()
    X, y = b.data, b.target
    names = [str(f).replace(" ", "_") for f in b.feature_names]
    if columns is not None:
        X, names = X[:, columns], [names[c] for c in columns]
    if n_max is not None and len(y) > n_max:
        keep = np.sort(rng.choice(len(y), n_max, replace=False))
        X, y = X[keep], y[keep]
    classes = [str(c) for c in b.target_names]
    y, flipped = plant_noise(X, y, len(classes), rng)
    return Dataset(numeric(names), classes, X, y, metadata={"noise_ids": flipped}, name=name)


def checkerboard(rng, n=300):
    X = rng.uniform(0, 2, (n, 4))
    y = ((X[:, 0] > 1) ^ (X[:, 1] > 1)).astype(int)
    y, flipped = plant_noise(X, y, 2, rng)
    return Dataset(numeric(["a", "b", "noise1", "noise2"]), ["even", "odd"], np.round(X, 4), y,
                   metadata={"noise_ids": flipped}, name="checkerboard")


def nominal_rules(rng, n=200):
    cats = ("x", "y", "z")
    X = rng.integers(0, 3, (n, 5)).astype(float)
    y = (((X[:, 0] == 0) & (X[:, 1] != 1)) | (X[:, 2] == 2)).astype(int)
    y, flipped = plant_noise(X, y, 2, rng)
    feats = [FeatureSpec(f"n{j}", NOMINAL, cats) for j in range(5)]
    return Dataset(feats, ["no", "yes"], X, y, metadata={"noise_ids": flipped}, name="nominal_rules")


def mixed_missing(rng, n=250):
    num = rng.normal(0, 1, (n, 2))
    nom = rng.integers(0, 4, (n, 2)).astype(float)
    score = num[:, 0] + 0.8 * (nom[:, 0] >= 2) - 0.6 * (nom[:, 1] == 1) + 0.3 * rng.normal(size=n)
    y = (score > 0.4).astype(int)
    X = np.column_stack([np.round(num, 4), nom])
    X[rng.random(X.shape) < 0.05] = np.nan
    y, flipped = plant_noise(X, y, 2, rng)
    feats = numeric(["u", "v"]) + [FeatureSpec("colour", NOMINAL, ("red", "green", "blue", "grey")),
                                   FeatureSpec("shape", NOMINAL, ("round", "square", "flat", "tall"))]
    return Dataset(feats, ["neg", "pos"], X, y, metadata={"noise_ids": flipped}, name="mixed_missing")


def main():
    rng = np.random.default_rng(20140601)
    sets = [
        from_sklearn(skd.load_iris, "iris", rng),
        from_sklearn(skd.load_wine, "wine", rng),
        from_sklearn(skd.load_breast_cancer, "breast_cancer", rng, n_max=300, columns=list(range(10))),
        checkerboard(rng),
        nominal_rules(rng),
        mixed_missing(rng),
    ]
    tc = generate_two_cluster(100, 0.5, 10, seed=7)
    sets.append(Dataset(tc.features, tc.classes, tc.X, tc.y,
                        metadata={"noise_ids": tc.metadata["detrimental_ids"]}, name="two_cluster"))
    OUT.mkdir(parents=True, exist_ok=True)
    for ds in sets:
        write_arff(ds, OUT / f"{ds.name}.arff")
        print(f"{ds.name}: n={len(ds)} d={len(ds.features)} classes={len(ds.classes)} "
              f"noise={len(ds.metadata['noise_ids'])}")


if __name__ == "__main__":
    main()
