"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Part one times each kernel in-process on representative shapes. Part two
runs an end-to-end cross-validation (knn, decision tree and the Wilcoxon
test) in a fresh interpreter per backend, selected through the
TRAINCLEAN_KERNELS environment variable.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from trainclean import _pykernels
from trainclean.kernels import nlogn_table

try:
    from trainclean import _ckernels
except ImportError:
    _ckernels = None

END_TO_END = """
import time
from trainclean import LearnerSpec, Protocol, cv_accuracy, EvalCache, BACKEND
from trainclean.corpus import load_bundled
from trainclean.stats import wilcoxon
import numpy as np
ds = load_bundled("breast_cancer")
t = time.perf_counter()
for a in ("knn", "decision_tree", "locally_weighted"):
    cv_accuracy(LearnerSpec.default(a), ds, Protocol(), EvalCache())
rng = np.random.default_rng(0)
for _ in range(200):
    wilcoxon([(50, 50 + x) for x in rng.normal(0.5, 1, 25)])
print(BACKEND, time.perf_counter() - t)
"""


def cases(rng):
    d = 10
    nominal = (rng.random(d) < 0.3).astype(np.uint8)
    q, t = rng.normal(size=(256, d)), rng.normal(size=(300, d))
    inv = np.ones(d)
    n = 300
    vals = np.sort(rng.normal(size=n))
    labels = rng.integers(0, 3, n)
    table = nlogn_table(n)
    ranks = np.arange(2, 52, 2, dtype=np.int64)
    return {
        "mixed_distances 256x300x10": lambda m: m.mixed_distances(q, t, nominal, inv),
        "split_costs n=300 k=3": lambda m: m.split_costs(vals, labels, 3, 2, table),
        "signed_rank_counts n=25": lambda m: m.signed_rank_counts(ranks),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':32s} {'python ms':>10s} {'cython ms':>10s} {'speed-up':>9s}")
    for name, fn in cases(rng).items():
        py = min(timeit.repeat(lambda: fn(_pykernels), number=20, repeat=args.repeat)) / 20
        if _ckernels is None:
            print(f"{name:32s} {1e3 * py:10.3f} {'n/a':>10s}")
            continue
        cy = min(timeit.repeat(lambda: fn(_ckernels), number=20, repeat=args.repeat)) / 20
        print(f"{name:32s} {1e3 * py:10.3f} {1e3 * cy:10.3f} {py / cy:8.1f}x")
    print("\nend-to-end (3 learners x 5x10 CV on breast_cancer + 200 Wilcoxon tests)")
    for backend in ("python", "cython"):
        env = dict(os.environ, TRAINCLEAN_KERNELS=backend)
        out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True,
                             text=True)
        if out.returncode:
            print(f"{backend:8s} unavailable")
            continue
        got, secs = out.stdout.split()
        print(f"{backend:8s} {float(secs):8.2f} s  (backend reported: {got})")


if __name__ == "__main__":
    main()
