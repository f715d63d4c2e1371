"""Datasets, file ingestion, stratified partitioning and a synthetic generator.

Cells are stored in a float matrix: numeric values as-is, nominal values as
their category index, missing cells as NaN. Instance ids survive every
subsetting operation so filtered datasets can be traced back to the source.
"""
from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .seeding import derive_rng

NUMERIC = "numeric"
NOMINAL = "nominal"
MISSING_TOKENS = ("", "?")


class DatasetError(ValueError):
    """Raised for malformed input files and invalid dataset operations."""


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    kind: str
    categories: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.kind == NOMINAL:
            if not self.categories:
                raise DatasetError(f"nominal feature {self.name!r} has no categories")
            if len(set(self.categories)) != len(self.categories):
                raise DatasetError(f"nominal feature {self.name!r} has duplicate categories")
            object.__setattr__(self, "categories", tuple(self.categories))
        elif self.kind == NUMERIC:
            if self.categories is not None:
                raise DatasetError(f"numeric feature {self.name!r} cannot declare categories")
        else:
            raise DatasetError(f"unknown feature kind {self.kind!r}")

    @property
    def is_nominal(self) -> bool:
        return self.kind == NOMINAL


@dataclass(frozen=True)
class Instance:
    id: int
    values: tuple
    label: int


class Dataset:
    """An immutable labelled table with stable instance ids.

    Parameters
    ----------
    features : sequence of FeatureSpec
    classes : sequence of str
        Class names; labels index into this list.
    X : array, shape (n, d)
        Cell matrix, NaN for missing.
    y : array of int, shape (n,)
    ids : array of int, optional
        Defaults to ``0..n-1``.
    metadata : mapping, optional
        Free-form annotations (the two-cluster generator records the
        planted detrimental ids here).
    name : str, optional
    """

    def __init__(self, features, classes, X, y, ids=None, metadata=None, name=""):
        self.features = tuple(features)
        self.classes = tuple(classes)
        X = np.array(X, dtype=np.float64).reshape(-1, len(self.features))
        y = np.array(y, dtype=np.int64).reshape(-1)
        ids = np.arange(len(y), dtype=np.int64) if ids is None else np.array(ids, dtype=np.int64)
        if len(self.classes) < 2:
            raise DatasetError("a dataset needs at least two classes")
        if len(set(self.classes)) != len(self.classes):
            raise DatasetError("duplicate class names")
        if not (len(X) == len(y) == len(ids)):
            raise DatasetError("X, y and ids disagree in length")
        if len(np.unique(ids)) != len(ids) or (len(ids) and ids.min() < 0):
            raise DatasetError("instance ids must be unique non-negative integers")
        if len(y) and (y.min() < 0 or y.max() >= len(self.classes)):
            raise DatasetError("label index out of range")
        for j, f in enumerate(self.features):
            if f.is_nominal:
                col = X[:, j]
                col = col[~np.isnan(col)]
                if len(col) and (col.min() < 0 or col.max() >= len(f.categories)
                                 or np.any(col != np.floor(col))):
                    raise DatasetError(f"bad category index in feature {f.name!r}")
        for arr in (X, y, ids):
            arr.flags.writeable = False
        self.X, self.y, self.ids = X, y, ids
        self.metadata = dict(metadata or {})
        self.name = name
        self._pos = None
        self._digest = None

    @classmethod
    def from_instances(cls, features, classes, instances: Iterable[Instance], **kw) -> "Dataset":
        instances = list(instances)
        d = len(features)
        for inst in instances:
            if len(inst.values) != d:
                raise DatasetError(f"instance {inst.id} has {len(inst.values)} values, expected {d}")
        X = [[math.nan if v is None else float(v) for v in inst.values] for inst in instances]
        return cls(features, classes, np.array(X, dtype=np.float64).reshape(len(instances), d),
                   [inst.label for inst in instances], [inst.id for inst in instances], **kw)

    @property
    def instances(self) -> tuple[Instance, ...]:
        out = []
        for i in range(len(self.y)):
            vals = []
            for j, f in enumerate(self.features):
                v = self.X[i, j]
                if math.isnan(v):
                    vals.append(None)
                elif f.is_nominal:
                    vals.append(int(v))
                else:
                    vals.append(float(v))
            out.append(Instance(int(self.ids[i]), tuple(vals), int(self.y[i])))
        return tuple(out)

    @property
    def nominal_mask(self) -> np.ndarray:
        return np.array([f.is_nominal for f in self.features], dtype=bool)

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def __len__(self):
        return len(self.y)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.features == other.features and self.classes == other.classes
                and np.array_equal(self.ids, other.ids) and np.array_equal(self.y, other.y)
                and np.array_equal(self.X, other.X, equal_nan=True))

    __hash__ = None

    def __repr__(self):
        return (f"Dataset(name={self.name!r}, n={len(self)}, features={len(self.features)}, "
                f"classes={len(self.classes)})")

    def positions(self, ids) -> np.ndarray:
        """Row positions of the given instance ids."""
        if self._pos is None:
            self._pos = {int(i): p for p, i in enumerate(self.ids)}
        try:
            return np.array([self._pos[int(i)] for i in ids], dtype=np.int64)
        except KeyError as exc:
            raise DatasetError(f"unknown instance id {exc.args[0]}") from None

    def take(self, positions) -> "Dataset":
        positions = np.asarray(positions, dtype=np.int64)
        return Dataset(self.features, self.classes, self.X[positions], self.y[positions],
                       self.ids[positions], self.metadata, self.name)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=len(self.classes))

    def fingerprint(self) -> str:
        """Content digest used as a cache key."""
        if self._digest is None:
            h = hashlib.sha1()
            h.update(repr((self.features, self.classes)).encode())
            for arr in (self.X, self.y, self.ids):
                h.update(arr.tobytes())
            self._digest = h.hexdigest()
        return self._digest


def subset(dataset: Dataset, keep_ids) -> Dataset:
    """Restrict `dataset` to `keep_ids`, preserving ids and row order."""
    keep = {int(i) for i in keep_ids}
    unknown = keep.difference(int(i) for i in dataset.ids)
    if unknown:
        raise DatasetError(f"unknown instance id {min(unknown)}")
    mask = np.array([int(i) in keep for i in dataset.ids], dtype=bool)
    return dataset.take(np.flatnonzero(mask))


# ---------------------------------------------------------------- CSV


def _is_number(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def load_csv(path, schema_hints: Mapping[str, str] | None = None) -> Dataset:
    """Read a header-first CSV file.

    The last column is the class unless a column is hinted as ``"label"``.
    Other hints (``"numeric"`` / ``"nominal"``) override kind inference, which
    is all-or-nothing: a column is numeric only if every non-missing cell
    parses as a number. Empty cells and ``?`` are missing.
    """
    hints = dict(schema_hints or {})
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DatasetError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = [[c.strip() for c in r] for r in rows[1:]]
    if not body:
        raise DatasetError(f"{path}: no data rows")
    for lineno, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise DatasetError(f"{path}:{lineno}: ragged row ({len(r)} cells, header has {len(header)})")
    for name, kind in hints.items():
        if name not in header:
            raise DatasetError(f"hint for unknown column {name!r}")
        if kind not in (NUMERIC, NOMINAL, "label"):
            raise DatasetError(f"unknown hint {kind!r} for column {name!r}")
    label_cols = [h for h, k in hints.items() if k == "label"]
    if len(label_cols) > 1:
        raise DatasetError("more than one label column hinted")
    label_idx = header.index(label_cols[0]) if label_cols else len(header) - 1

    labels_raw = [r[label_idx] for r in body]
    if any(tok in MISSING_TOKENS for tok in labels_raw):
        raise DatasetError(f"{path}: missing class label")
    classes = list(dict.fromkeys(labels_raw))
    if len(classes) < 2:
        raise DatasetError(f"{path}: single-class dataset ({classes[0]!r})")
    y = [classes.index(t) for t in labels_raw]

    features = []
    columns = []
    for j, name in enumerate(header):
        if j == label_idx:
            continue
        cells = [r[j] for r in body]
        present = [c for c in cells if c not in MISSING_TOKENS]
        kind = hints.get(name) or (NUMERIC if all(_is_number(c) for c in present) else NOMINAL)
        if kind == NUMERIC:
            try:
                col = [math.nan if c in MISSING_TOKENS else float(c) for c in cells]
            except ValueError as exc:
                raise DatasetError(f"{path}: column {name!r} hinted numeric: {exc}") from None
            features.append(FeatureSpec(name, NUMERIC))
        else:
            cats = list(dict.fromkeys(present)) or ["?"]
            col = [math.nan if c in MISSING_TOKENS else float(cats.index(c)) for c in cells]
            features.append(FeatureSpec(name, NOMINAL, tuple(cats)))
        columns.append(col)
    X = np.array(columns, dtype=np.float64).T.reshape(len(body), len(features))
    return Dataset(features, classes, X, y, name=Path(path).stem)


def write_csv(dataset: Dataset, path, class_name: str = "class") -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f.name for f in dataset.features] + [class_name])
        for row, label in zip(dataset.X, dataset.y):
            w.writerow([_format_cell(f, v) for f, v in zip(dataset.features, row)]
                       + [dataset.classes[label]])


# ---------------------------------------------------------------- ARFF


def _split_arff(line: str) -> list[str]:
    """Split on commas, honouring single/double quotes."""
    out, buf, quote = [], [], None
    for ch in line:
        if quote:
            if ch == quote:
                quote = None
            else:
                buf.append(ch)
        elif ch in "'\"":
            quote = ch
        elif ch == ",":
            out.append("".join(buf).strip())
            buf = []
        else:
            buf.append(ch)
    if quote:
        raise DatasetError(f"unterminated quote in {line!r}")
    out.append("".join(buf).strip())
    return out


def _take_name(rest: str) -> tuple[str, str]:
    rest = rest.strip()
    if rest[:1] in "'\"":
        end = rest.find(rest[0], 1)
        if end < 0:
            raise DatasetError(f"unterminated attribute name in {rest!r}")
        return rest[1:end], rest[end + 1:].strip()
    parts = rest.split(None, 1)
    if len(parts) < 2:
        raise DatasetError(f"attribute declaration lacks a type: {rest!r}")
    return parts[0], parts[1].strip()


def load_arff(path) -> Dataset:
    """Read a dense ARFF file; the last attribute is the (nominal) class.

    A ``% ids: ...`` comment written by :func:`write_arff` restores the
    original instance ids, and ``% meta <key>: <ints>`` lines restore
    integer-list metadata.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    attrs: list[tuple[str, tuple[str, ...] | None]] = []
    relation = None
    ids = None
    metadata: dict = {}
    rows: list[list[str]] = []
    in_data = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("%"):
            body = line[1:].strip()
            if body.startswith("ids:"):
                ids = [int(t) for t in body[4:].split(",") if t.strip()]
            elif body.startswith("meta "):
                key, _, vals = body[5:].partition(":")
                metadata[key.strip()] = [int(t) for t in vals.split(",") if t.strip()]
            continue
        if in_data:
            rows.append(_split_arff(line))
            continue
        low = line.lower()
        if low.startswith("@relation"):
            relation = line[len("@relation"):].strip().strip("'\"")
        elif low.startswith("@attribute"):
            name, typ = _take_name(line[len("@attribute"):])
            if typ.startswith("{"):
                if not typ.endswith("}"):
                    raise DatasetError(f"{path}:{lineno}: malformed nominal declaration")
                cats = tuple(c for c in _split_arff(typ[1:-1]))
                attrs.append((name, cats))
            elif typ.lower() in ("numeric", "real", "integer"):
                attrs.append((name, None))
            else:
                raise DatasetError(f"{path}:{lineno}: unsupported attribute type {typ!r}")
        elif low.startswith("@data"):
            in_data = True
        else:
            raise DatasetError(f"{path}:{lineno}: unexpected header line {line!r}")
    if relation is None or not in_data:
        raise DatasetError(f"{path}: missing @relation or @data section")
    if not attrs or attrs[-1][1] is None:
        raise DatasetError(f"{path}: no nominal class attribute")
    if not rows:
        raise DatasetError(f"{path}: no data rows")

    class_name, classes = attrs[-1]
    feats = [FeatureSpec(n, NOMINAL, c) if c is not None else FeatureSpec(n, NUMERIC)
             for n, c in attrs[:-1]]
    X = np.empty((len(rows), len(feats)))
    y = []
    for i, r in enumerate(rows):
        if len(r) != len(attrs):
            raise DatasetError(f"{path}: data row {i + 1} has {len(r)} cells, expected {len(attrs)}")
        for j, f in enumerate(feats):
            tok = r[j]
            if tok == "?":
                X[i, j] = math.nan
            elif f.is_nominal:
                if tok not in f.categories:
                    raise DatasetError(f"{path}: undeclared value {tok!r} for attribute {f.name!r}")
                X[i, j] = f.categories.index(tok)
            else:
                try:
                    X[i, j] = float(tok)
                except ValueError:
                    raise DatasetError(f"{path}: non-numeric value {tok!r} for {f.name!r}") from None
        tok = r[-1]
        if tok not in classes:
            raise DatasetError(f"{path}: undeclared value {tok!r} for class attribute {class_name!r}")
        y.append(classes.index(tok))
    if ids is not None and len(ids) != len(rows):
        raise DatasetError(f"{path}: ids comment does not match row count")
    return Dataset(feats, classes, X, y, ids, metadata, name=relation)


def _quote(s: str) -> str:
    if any(ch in s for ch in " ,{}'\"%\t") or s in MISSING_TOKENS:
        return "'" + s.replace("'", "") + "'"
    return s


def _format_cell(f: FeatureSpec, v: float) -> str:
    if math.isnan(v):
        return "?"
    if f.is_nominal:
        return f.categories[int(v)]
    return repr(float(v))


def write_arff(dataset: Dataset, path, class_name: str = "class") -> None:
    """Write `dataset` as ARFF; ids and integer-list metadata go in comments."""
    lines = [f"@relation {_quote(dataset.name or 'dataset')}",
             "% ids: " + ",".join(str(int(i)) for i in dataset.ids)]
    for key, vals in sorted(dataset.metadata.items()):
        if isinstance(vals, (list, tuple)) and all(isinstance(v, (int, np.integer)) for v in vals):
            lines.append(f"% meta {key}: " + ",".join(str(int(v)) for v in vals))
    for f in dataset.features:
        if f.is_nominal:
            lines.append(f"@attribute {_quote(f.name)} {{{','.join(_quote(c) for c in f.categories)}}}")
        else:
            lines.append(f"@attribute {_quote(f.name)} numeric")
    lines.append(f"@attribute {_quote(class_name)} {{{','.join(_quote(c) for c in dataset.classes)}}}")
    lines.append("@data")
    for row, label in zip(dataset.X, dataset.y):
        cells = [_quote(_format_cell(f, v)) if f.is_nominal and not math.isnan(v) else _format_cell(f, v)
                 for f, v in zip(dataset.features, row)]
        lines.append(",".join(cells + [_quote(dataset.classes[label])]))
    Path(path).write_text("\n".join(lines) + "\n")


def load_dataset(path) -> Dataset:
    """Dispatch on file extension (``.arff`` or ``.csv``)."""
    suffix = Path(path).suffix.lower()
    if suffix == ".arff":
        return load_arff(path)
    if suffix == ".csv":
        return load_csv(path)
    raise DatasetError(f"unsupported dataset format: {path}")


# ---------------------------------------------------------------- partitions


@dataclass(frozen=True)
class Partition:
    """Fold assignments for repeated k-fold cross-validation.

    ``runs[r][p]`` is the fold of the instance at row position ``p`` (whose
    id is ``ids[p]``) in run ``r``.
    """

    ids: tuple[int, ...]
    runs: tuple[tuple[int, ...], ...]
    k: int
    seed: int

    def assignment(self, run: int) -> np.ndarray:
        return np.asarray(self.runs[run], dtype=np.int64)

    def folds(self, run: int) -> list[tuple[np.ndarray, np.ndarray]]:
        """(train positions, test positions) per fold of one run."""
        a = self.assignment(run)
        return [(np.flatnonzero(a != f), np.flatnonzero(a == f)) for f in range(self.k)]

    def fold_of(self, run: int) -> dict[int, int]:
        return dict(zip(self.ids, self.runs[run]))


def stratified_partition(dataset: Dataset, k: int, runs: int, seed: int) -> Partition:
    """Stratified fold assignment, one independent shuffle per run.

    For each run the class members are shuffled with a stream derived from
    ``(seed, run)`` and dealt round-robin into folds; dealing continues
    from the fold where the previous class stopped so fold sizes stay
    balanced too.
    """
    if k < 2:
        raise DatasetError("need at least two folds")
    if runs < 1:
        raise DatasetError("need at least one run")
    n = len(dataset)
    if k > n:
        raise DatasetError(f"{k} folds requested for {n} instances")
    out = []
    for r in range(runs):
        rng = derive_rng(seed, "partition", r)
        assign = np.empty(n, dtype=np.int64)
        start = 0
        for c in range(dataset.n_classes):
            members = np.flatnonzero(dataset.y == c)
            if not len(members):
                continue
            members = members[rng.permutation(len(members))]
            assign[members] = (start + np.arange(len(members))) % k
            start = (start + len(members)) % k
        out.append(tuple(int(v) for v in assign))
    return Partition(tuple(int(i) for i in dataset.ids), tuple(out), k, seed)


# ---------------------------------------------------------------- synthetic


def generate_two_cluster(n_per_class: int, overlap: float, n_detrimental: int, seed: int) -> Dataset:
    """Two 2-D Gaussian clusters with planted label noise.

    Class centres sit at (-1, 0) and (1, 0). The per-axis standard deviation
    grows linearly with `overlap`, from 0.1 (separated by twenty deviations)
    at 0 to 1.0 at 1. In each class `n_detrimental` points drawn at random
    from the half nearest the class centre get the opposite label, so they
    sit deep inside the cluster of the other class without forming a
    clump of their own. Their ids are stored in
    ``metadata["detrimental_ids"]``.
    """
    if n_per_class < 1:
        raise DatasetError("n_per_class must be >= 1")
    if not 0.0 <= overlap <= 1.0:
        raise DatasetError("overlap must lie in [0, 1]")
    if not 0 <= n_detrimental <= n_per_class:
        raise DatasetError("n_detrimental must lie in [0, n_per_class]")
    rng = derive_rng(seed, "two-cluster")
    sigma = 0.1 + 0.9 * overlap
    centres = np.array([[-1.0, 0.0], [1.0, 0.0]])
    X, y, planted = [], [], []
    for c in (0, 1):
        pts = centres[c] + sigma * rng.standard_normal((n_per_class, 2))
        labels = np.full(n_per_class, c)
        depth = np.linalg.norm(pts - centres[c], axis=1)
        # random picks from the inner half: deep, but not one tight clump
        inner = np.argsort(depth, kind="stable")[:max(n_detrimental, (n_per_class + 1) // 2)]
        flip = rng.choice(inner, n_detrimental, replace=False)
        labels[flip] = 1 - c
        planted.extend(int(c * n_per_class + i) for i in sorted(flip))
        X.append(pts)
        y.append(labels)
    feats = [FeatureSpec("x1", NUMERIC), FeatureSpec("x2", NUMERIC)]
    return Dataset(feats, ("A", "B"), np.vstack(X), np.concatenate(y),
                   metadata={"detrimental_ids": sorted(planted)},
                   name=f"two_cluster_s{seed}")
