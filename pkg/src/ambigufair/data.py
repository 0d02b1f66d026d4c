"""Datasets, feature encodings and the train/test + half/half splits.

Raw records stay column-oriented (numeric columns as float arrays,
categorical columns as string arrays). The sensitive bit ``s`` and the class
bit ``y`` live outside the feature columns, so no encoded matrix can ever
contain them. All arrays are frozen after construction.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

NUMERIC = "numeric"
CATEGORICAL = "categorical"

# Reserved canonical-CSV column names for the sensitive and class bits.
SENSITIVE_COL = "__s__"
LABEL_COL = "__y__"


class SchemaError(ValueError):
    """Raised when data does not conform to its declared schema."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Column:
    name: str
    kind: str
    vocabulary: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise SchemaError(f"unknown column kind {self.kind!r} for {self.name!r}")
        if self.kind == CATEGORICAL:
            if not self.vocabulary:
                raise SchemaError(f"categorical column {self.name!r} has empty vocabulary")
            if len(set(self.vocabulary)) != len(self.vocabulary):
                raise SchemaError(f"categorical column {self.name!r} has duplicate categories")


@dataclass(frozen=True)
class FeatureSchema:
    columns: tuple[Column, ...]

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate column names in schema")

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    def __getitem__(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise KeyError(name)


@dataclass(frozen=True)
class Dataset:
    """Rows with raw feature values plus optional sensitive/class bits."""

    schema: FeatureSchema
    columns: dict[str, np.ndarray]
    s: np.ndarray | None = None
    y: np.ndarray | None = None
    name: str = "dataset"

    def __post_init__(self):
        missing = [c.name for c in self.schema.columns if c.name not in self.columns]
        if missing:
            raise SchemaError(f"columns missing from data: {missing}")
        extra = set(self.columns) - set(self.schema.names)
        if extra:
            raise SchemaError(f"columns not in schema: {sorted(extra)}")
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise SchemaError(f"ragged columns: lengths {sorted(lengths)}")
        n = lengths.pop() if lengths else 0
        cols = {}
        for col in self.schema.columns:
            v = self.columns[col.name]
            if col.kind == NUMERIC:
                v = np.asarray(v, dtype=np.float64)
                if not np.all(np.isfinite(v)):
                    raise SchemaError(f"non-finite values in numeric column {col.name!r}")
            else:
                v = np.asarray(v, dtype=object)
            cols[col.name] = _frozen(v)
        object.__setattr__(self, "columns", cols)
        for attr in ("s", "y"):
            bits = getattr(self, attr)
            if bits is None:
                continue
            bits = np.asarray(bits, dtype=np.int8)
            if len(bits) != n:
                raise SchemaError(f"{attr} has length {len(bits)}, expected {n}")
            if bits.size and not np.isin(bits, (0, 1)).all():
                raise SchemaError(f"{attr} must be a 0/1 vector")
            object.__setattr__(self, attr, _frozen(bits))

    @property
    def n_rows(self) -> int:
        if not self.schema.columns:
            return 0
        return len(self.columns[self.schema.columns[0].name])

    def subset(self, indices, name: str | None = None) -> "Dataset":
        idx = np.asarray(indices)
        return Dataset(
            schema=self.schema,
            columns={k: v[idx] for k, v in self.columns.items()},
            s=None if self.s is None else self.s[idx],
            y=None if self.y is None else self.y[idx],
            name=name or self.name,
        )

    def require_s(self) -> np.ndarray:
        if self.s is None:
            raise SchemaError(f"dataset {self.name!r} carries no sensitive column")
        return self.s

    def require_y(self) -> np.ndarray:
        if self.y is None:
            raise SchemaError(f"dataset {self.name!r} carries no class column")
        return self.y


@dataclass(frozen=True)
class EncodingParams:
    """Train-fitted statistics: z-score parameters and one-hot layouts.

    Each categorical column maps to its train vocabulary plus one trailing
    "unseen" bucket, so test-time categories absent from train never error.
    """

    schema: FeatureSchema
    numeric_stats: dict[str, tuple[float, float]]  # name -> (mean, std)
    categorical_levels: dict[str, tuple[str, ...]]  # name -> train vocabulary
    fitted_on: str = ""

    def __post_init__(self):
        for name, (_, std) in self.numeric_stats.items():
            if std < 0:
                raise SchemaError(f"negative std for column {name!r}")

    @property
    def width(self) -> int:
        d = 0
        for col in self.schema.columns:
            if col.kind == NUMERIC:
                d += 1
            else:
                d += len(self.categorical_levels[col.name]) + 1
        return d

    def feature_names(self) -> list[str]:
        out = []
        for col in self.schema.columns:
            if col.kind == NUMERIC:
                out.append(col.name)
            else:
                out.extend(f"{col.name}={v}" for v in self.categorical_levels[col.name])
                out.append(f"{col.name}=<unseen>")
        return out


@dataclass(frozen=True)
class EncodedMatrix:
    values: np.ndarray
    encoding: EncodingParams

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise SchemaError("encoded matrix must be 2-D")
        if not np.all(np.isfinite(v)):
            raise SchemaError("encoded matrix contains non-finite entries")
        if v.shape[1] != self.encoding.width:
            raise SchemaError(
                f"matrix width {v.shape[1]} != encoding width {self.encoding.width}"
            )
        object.__setattr__(self, "values", _frozen(v))

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]


def fit_encoding(train: Dataset) -> EncodingParams:
    """Fit z-score statistics and one-hot layouts on the training rows only.

    Population (ddof=0) standard deviation; a constant column gets std 0 and
    later encodes to all zeros.
    """
    if train.n_rows == 0:
        raise SchemaError("cannot fit an encoding on an empty dataset")
    numeric_stats = {}
    categorical_levels = {}
    for col in train.schema.columns:
        v = train.columns[col.name]
        if col.kind == NUMERIC:
            numeric_stats[col.name] = (float(np.mean(v)), float(np.std(v)))
        else:
            seen = []
            seen_set = set()
            for item in v:
                if item not in seen_set:
                    seen.append(item)
                    seen_set.add(item)
            categorical_levels[col.name] = tuple(seen)
    return EncodingParams(
        schema=train.schema,
        numeric_stats=numeric_stats,
        categorical_levels=categorical_levels,
        fitted_on=train.name,
    )


def encode(data: Dataset, params: EncodingParams) -> EncodedMatrix:
    """Map raw rows to the dense real design matrix defined by ``params``."""
    if data.schema.names != params.schema.names or any(
        a.kind != b.kind for a, b in zip(data.schema.columns, params.schema.columns)
    ):
        raise SchemaError(
            f"dataset {data.name!r} does not conform to the encoding's schema"
        )
    n = data.n_rows
    out = np.zeros((n, params.width), dtype=np.float64)
    j = 0
    for col in params.schema.columns:
        v = data.columns[col.name]
        if col.kind == NUMERIC:
            mean, std = params.numeric_stats[col.name]
            if std > 0:
                out[:, j] = (v - mean) / std
            j += 1
        else:
            levels = params.categorical_levels[col.name]
            index = {cat: k for k, cat in enumerate(levels)}
            unseen = len(levels)
            for i, item in enumerate(v):
                out[i, j + index.get(item, unseen)] = 1.0
            j += unseen + 1
    return EncodedMatrix(values=out, encoding=params)


def split_train_test(data: Dataset, fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded uniform shuffle into |train| = round(fraction * N) and the rest."""
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    n = data.n_rows
    if n < 2:
        raise ValueError(f"need at least 2 rows to split, got {n}")
    order = np.random.default_rng(seed).permutation(n)
    n_train = int(math.floor(fraction * n + 0.5))
    train = data.subset(order[:n_train], name=f"{data.name}/train")
    test = data.subset(order[n_train:], name=f"{data.name}/test")
    return train, test


def split_d1_d2(train: Dataset, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded random halving; sizes differ by at most one (d1 gets the extra row).

    d1 is the attribute-classifier pool (x, s); d2 is the task pool (x, y).
    Both halves keep s so ensemble diagnostics on d2 stay possible; s is never
    part of the feature columns either way.
    """
    train.require_s()
    train.require_y()
    n = train.n_rows
    if n < 2:
        raise ValueError(f"need at least 2 rows to halve, got {n}")
    order = np.random.default_rng(seed).permutation(n)
    half = (n + 1) // 2
    d1 = train.subset(order[:half], name=f"{train.name}/d1")
    d2 = train.subset(order[half:], name=f"{train.name}/d2")
    return d1, d2


def schema_to_dict(schema: FeatureSchema) -> list:
    return [
        {"name": c.name, "kind": c.kind, "vocabulary": list(c.vocabulary)}
        for c in schema.columns
    ]


def schema_from_dict(doc: list) -> FeatureSchema:
    return FeatureSchema(
        tuple(Column(c["name"], c["kind"], tuple(c.get("vocabulary", ()))) for c in doc)
    )


def encoding_to_dict(params: EncodingParams) -> dict:
    return {
        "schema": schema_to_dict(params.schema),
        "numeric_stats": {k: list(v) for k, v in params.numeric_stats.items()},
        "categorical_levels": {k: list(v) for k, v in params.categorical_levels.items()},
        "fitted_on": params.fitted_on,
    }


def encoding_from_dict(doc: dict) -> EncodingParams:
    return EncodingParams(
        schema=schema_from_dict(doc["schema"]),
        numeric_stats={k: (float(v[0]), float(v[1])) for k, v in doc["numeric_stats"].items()},
        categorical_levels={k: tuple(v) for k, v in doc["categorical_levels"].items()},
        fitted_on=doc.get("fitted_on", ""),
    )


# ---------------------------------------------------------------------------
# Canonical on-disk form: CSV with __s__/__y__ columns + JSON schema sidecar.


def save_canonical(data: Dataset, csv_path, schema_path) -> None:
    csv_path, schema_path = Path(csv_path), Path(schema_path)
    header = data.schema.names + ([SENSITIVE_COL] if data.s is not None else []) + (
        [LABEL_COL] if data.y is not None else []
    )
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(data.n_rows):
            row = []
            for col in data.schema.columns:
                v = data.columns[col.name][i]
                row.append(repr(float(v)) if col.kind == NUMERIC else str(v))
            if data.s is not None:
                row.append(str(int(data.s[i])))
            if data.y is not None:
                row.append(str(int(data.y[i])))
            writer.writerow(row)
    doc = {
        "name": data.name,
        "columns": [
            {"name": c.name, "kind": c.kind, "vocabulary": list(c.vocabulary)}
            for c in data.schema.columns
        ],
        "has_s": data.s is not None,
        "has_y": data.y is not None,
    }
    with open(schema_path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_canonical(csv_path, schema_path) -> Dataset:
    csv_path, schema_path = Path(csv_path), Path(schema_path)
    with open(schema_path) as fh:
        doc = json.load(fh)
    schema = schema_from_dict(doc["columns"])
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    expected = schema.names + ([SENSITIVE_COL] if doc["has_s"] else []) + (
        [LABEL_COL] if doc["has_y"] else []
    )
    if header != expected:
        raise SchemaError(f"canonical CSV header mismatch: {header} != {expected}")
    pos = {name: k for k, name in enumerate(header)}
    columns = {}
    for col in schema.columns:
        raw = [r[pos[col.name]] for r in rows]
        columns[col.name] = (
            np.array([float(x) for x in raw]) if col.kind == NUMERIC else np.array(raw, dtype=object)
        )
    s = np.array([int(r[pos[SENSITIVE_COL]]) for r in rows]) if doc["has_s"] else None
    y = np.array([int(r[pos[LABEL_COL]]) for r in rows]) if doc["has_y"] else None
    return Dataset(schema=schema, columns=columns, s=s, y=y, name=doc.get("name", csv_path.stem))
