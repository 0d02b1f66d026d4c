import os
from pathlib import Path

import numpy as np
import pytest

from ambigufair.data import Column, Dataset, FeatureSchema

FIXTURES = Path(__file__).parent / "data"


def raw_data_dir() -> Path | None:
    """Directory holding the original distribution files, if present."""
    candidates = []
    env = os.environ.get("AMBIGUFAIR_DATA_DIR")
    if env:
        candidates += [Path(env) / "raw", Path(env)]
    root = Path(__file__).resolve().parents[1]
    candidates += [root / "data" / "raw", root / "data"]
    for c in candidates:
        if c.is_dir():
            return c
    return None


def raw_file(name: str) -> Path | None:
    base = raw_data_dir()
    if base is None:
        return None
    p = base / name
    return p if p.exists() else None


def require_raw(*names: str):
    paths = [raw_file(n) for n in names]
    if any(p is None for p in paths):
        pytest.skip(
            f"raw dataset file(s) {list(names)} not present (this sandbox has no "
            "network egress; see README for download locations, then place them "
            "under data/raw/ or $AMBIGUFAIR_DATA_DIR/raw/)"
        )
    return paths[0] if len(paths) == 1 else paths


def make_dataset(n=40, d=3, seed=0, name="toy") -> Dataset:
    rng = np.random.default_rng(seed)
    schema = FeatureSchema(tuple(Column(f"f{j}", "numeric") for j in range(d)))
    columns = {f"f{j}": rng.normal(size=n) for j in range(d)}
    return Dataset(
        schema=schema,
        columns=columns,
        s=rng.integers(0, 2, n),
        y=rng.integers(0, 2, n),
        name=name,
    )
