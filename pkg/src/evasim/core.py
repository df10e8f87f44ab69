"""Feature vectors, datasets, CSV ingestion, and [0,1] normalization.

Conventions used throughout the toolkit:

* a feature vector is a 1-D float64 numpy array of length d;
* class labels are binary with ``LEGITIMATE = 0`` and ``MALICIOUS = 1``;
* after normalization every feature lies in [0, 1].
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import Sequence

import numpy as np

from .rng import Rng


class ClassLabel(IntEnum):
    LEGITIMATE = 0
    MALICIOUS = 1


LEGITIMATE = int(ClassLabel.LEGITIMATE)
MALICIOUS = int(ClassLabel.MALICIOUS)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Labeled samples: an (n, d) float matrix plus an (n,) 0/1 label vector."""

    samples: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        samples = np.ascontiguousarray(self.samples, dtype=np.float64)
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if samples.ndim != 2:
            raise ValueError("samples must be a 2-D array")
        if labels.shape != (samples.shape[0],):
            raise ValueError("labels must be one per sample")
        if not np.isin(labels, (0, 1)).all():
            raise ValueError("labels must be 0 (legitimate) or 1 (malicious)")
        names = tuple(self.feature_names) or tuple(
            f"f{i}" for i in range(samples.shape[1])
        )
        if len(names) != samples.shape[1]:
            raise ValueError("feature_names must match dimensionality")
        samples.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def d(self) -> int:
        return self.samples.shape[1]

    def class_counts(self) -> tuple[int, int]:
        malicious = int(self.labels.sum())
        return self.n - malicious, malicious


@dataclass(frozen=True, eq=False)
class NormalizationMap:
    """Per-feature (min, max) pairs in original units."""

    feature_names: tuple[str, ...]
    mins: np.ndarray
    maxs: np.ndarray

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, NormalizationMap)
            and self.feature_names == other.feature_names
            and np.array_equal(self.mins, other.mins)
            and np.array_equal(self.maxs, other.maxs)
        )

    def __post_init__(self):
        mins = np.asarray(self.mins, dtype=np.float64)
        maxs = np.asarray(self.maxs, dtype=np.float64)
        if mins.shape != maxs.shape or mins.ndim != 1:
            raise ValueError("mins and maxs must be matching 1-D arrays")
        if (maxs < mins).any():
            raise ValueError("max must be >= min for every feature")
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    def __len__(self) -> int:
        return self.mins.shape[0]

    def to_json(self) -> str:
        features = [
            {"name": name, "min": float(lo), "max": float(hi)}
            for name, lo, hi in zip(self.feature_names, self.mins, self.maxs)
        ]
        return json.dumps({"features": features}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "NormalizationMap":
        doc = json.loads(text)
        feats = doc["features"]
        return cls(
            feature_names=tuple(f["name"] for f in feats),
            mins=np.array([f["min"] for f in feats], dtype=np.float64),
            maxs=np.array([f["max"] for f in feats], dtype=np.float64),
        )


def _is_number(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def load_csv(
    path: str | Path,
    label_column: str | int,
    positive_label: str,
    categorical_columns: Sequence[str | int] = (),
) -> Dataset:
    """Read a comma-separated file into a Dataset in original units.

    The label column is matched as raw text against ``positive_label``
    (match -> malicious=1, anything else -> legitimate=0).  A single header
    row is auto-detected when the first row contains any non-numeric cell
    outside the declared categorical columns.  Columns listed in
    ``categorical_columns`` (by header name or index) are one-hot expanded
    into indicator features named ``column=value``.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least 2 data rows")

    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"{path}: ragged rows (inconsistent column counts)")

    # A header exists when a *feature* cell of row 0 is non-numeric; label
    # and declared-categorical cells are allowed to be text in data rows, so
    # they do not count toward detection.
    by_name = [c for c in (label_column, *categorical_columns) if isinstance(c, str)]
    by_index = {
        c % width for c in (label_column, *categorical_columns)
        if isinstance(c, int) and -width <= c < width
    }
    non_numeric = {i for i, cell in enumerate(rows[0]) if not _is_number(cell)}
    has_header = bool(non_numeric - by_index) if not by_name else bool(non_numeric)
    if by_name and not has_header:
        raise ValueError(
            f"column {by_name[0]!r} given by name but the file has no header row"
        )
    header: list[str] | None = None
    if has_header:
        header = [cell.strip() for cell in rows[0]]
        rows = rows[1:]
        if len(rows) < 2:
            raise ValueError(f"{path}: need at least 2 data rows")
    names = header or [str(i) for i in range(width)]

    def resolve(column: str | int, what: str) -> int:
        if isinstance(column, int):
            if not -width <= column < width:
                raise ValueError(f"unknown {what} {column!r}")
            return column % width
        if column not in names:
            raise ValueError(f"unknown {what} {column!r}")
        return names.index(column)

    label_idx = resolve(label_column, "label column")
    categorical_idx = {resolve(c, "categorical column") for c in categorical_columns}
    if label_idx in categorical_idx:
        raise ValueError("label column cannot be categorical")

    numeric_idx = [
        i for i in range(width) if i != label_idx and i not in categorical_idx
    ]
    labels = np.fromiter(
        (1 if row[label_idx].strip() == positive_label else 0 for row in rows),
        dtype=np.int64,
        count=len(rows),
    )

    numeric = np.empty((len(rows), len(numeric_idx)), dtype=np.float64)
    for r, row in enumerate(rows):
        for out_c, c in enumerate(numeric_idx):
            cell = row[c].strip()
            try:
                numeric[r, out_c] = float(cell)
            except ValueError:
                raise ValueError(
                    f"{path}: non-numeric value {cell!r} in row {r}, "
                    f"column {names[c]!r}"
                ) from None

    blocks = [numeric]
    out_names = [names[c] for c in numeric_idx]
    for c in sorted(categorical_idx):
        values = sorted({row[c].strip() for row in rows})
        block = np.zeros((len(rows), len(values)), dtype=np.float64)
        index = {v: j for j, v in enumerate(values)}
        for r, row in enumerate(rows):
            block[r, index[row[c].strip()]] = 1.0
        blocks.append(block)
        out_names.extend(f"{names[c]}={v}" for v in values)

    return Dataset(np.hstack(blocks), labels, tuple(out_names))


def fit_normalizer(data: Dataset) -> NormalizationMap:
    """Per-feature min/max over every sample."""
    if data.n < 1:
        raise ValueError("cannot fit a normalizer on an empty dataset")
    return NormalizationMap(
        feature_names=data.feature_names,
        mins=data.samples.min(axis=0),
        maxs=data.samples.max(axis=0),
    )


def apply_normalizer(
    nmap: NormalizationMap, v: np.ndarray, clip: bool = True
) -> np.ndarray:
    """Map a vector to (x - min) / (max - min); constant features map to 0."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1] != len(nmap):
        raise ValueError(
            f"dimension mismatch: vector has {v.shape[-1]} features, "
            f"normalizer has {len(nmap)}"
        )
    span = nmap.maxs - nmap.mins
    out = np.where(span > 0, (v - nmap.mins) / np.where(span > 0, span, 1.0), 0.0)
    if clip:
        out = np.clip(out, 0.0, 1.0)
    return out


def normalize_dataset(
    nmap: NormalizationMap, data: Dataset, clip: bool = True
) -> Dataset:
    """Apply a normalizer to every sample of a dataset."""
    return Dataset(
        apply_normalizer(nmap, data.samples, clip=clip),
        data.labels,
        data.feature_names,
    )


def shuffle(data: Dataset, rng: Rng) -> Dataset:
    """Row permutation preserving sample/label pairing."""
    perm = rng.permutation(data.n)
    return Dataset(data.samples[perm], data.labels[perm], data.feature_names)


def save_vectors_csv(path: str | Path, vectors: np.ndarray) -> None:
    """One vector per row, plain comma-separated floats."""
    arr = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in arr:
            writer.writerow([repr(float(x)) for x in row])


def load_vectors_csv(path: str | Path) -> np.ndarray:
    """Inverse of save_vectors_csv."""
    with open(path, newline="") as fh:
        rows = [[float(c) for c in row] for row in csv.reader(fh) if row]
    if not rows:
        return np.empty((0, 0), dtype=np.float64)
    return np.asarray(rows, dtype=np.float64)


def save_dataset_csv(data: Dataset, path: str | Path) -> None:
    """Labeled export: header row, feature columns, trailing label column.

    Round-trips through load_csv(path, "label", "1").
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([*data.feature_names, "label"])
        for row, label in zip(data.samples, data.labels):
            writer.writerow([repr(float(x)) for x in row] + [str(int(label))])
