"""Instance-hardness based training-set filtering versus hyper-parameter tuning."""
from .cv import EvalCache, Protocol, cv_accuracy
from .data import Dataset, FeatureSpec, Instance, load_arff, load_csv, load_dataset
from .filtering import adaptive_filter, ensemble_filter, exhaustive_best_subset, run_la
from .hardness import HardnessEstimate, estimate_hardness
from .hpo import random_search
from .kernels import BACKEND
from .learners import ALGORITHMS, LearnerSpec, predict, train

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS", "BACKEND", "Dataset", "EvalCache", "FeatureSpec", "HardnessEstimate",
    "Instance", "LearnerSpec", "Protocol", "adaptive_filter", "cv_accuracy", "ensemble_filter",
    "estimate_hardness", "exhaustive_best_subset", "load_arff", "load_csv", "load_dataset",
    "predict", "random_search", "run_la", "train",
]
