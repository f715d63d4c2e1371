"""Small bundled datasets, each with 10% planted label noise.

The planted ids are stored in the ARFF files (``% meta noise_ids``) and are
restored into ``Dataset.metadata`` on load. ``scripts/build_corpus.py``
regenerates the files.
"""
from pathlib import Path

from ..data import load_arff

_DIR = Path(__file__).resolve().parent


def bundled_names() -> list[str]:
    return sorted(p.stem for p in _DIR.glob("*.arff"))


def bundled_path(name: str) -> Path:
    p = _DIR / f"{name}.arff"
    if not p.exists():
        raise FileNotFoundError(f"no bundled dataset {name!r}; have {bundled_names()}")
    return p


def bundled_paths() -> list[Path]:
    return [bundled_path(n) for n in bundled_names()]


def load_bundled(name: str):
    return load_arff(bundled_path(name))
