"""Loaders for the three benchmark tasks plus a two-knob synthetic generator.

Loaders are strictly offline: they parse the original distribution files
byte-for-byte as published (see RAW_SOURCES for download locations) and never
fetch anything. Each returns a Dataset whose feature columns exclude the raw
sensitive attribute; the sensitive bit lives in ``s`` and the class bit in
``y``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .data import CATEGORICAL, NUMERIC, Column, Dataset, FeatureSchema

# Where to obtain the raw files (documentation only; nothing downloads them).
RAW_SOURCES = {
    "german": {
        "files": ["german.data"],
        "url": "https://archive.ics.uci.edu/dataset/144/statlog+german+credit+data",
    },
    "adult": {
        "files": ["adult.data", "adult.test"],
        "url": "https://archive.ics.uci.edu/dataset/2/adult",
    },
    "compas": {
        "files": ["compas-scores-two-years.csv"],
        "url": "https://github.com/propublica/compas-analysis",
    },
}

# Binarization conventions (overridable): the papers' tables name only the
# sensitive attribute, not its split.
GERMAN_AGE_THRESHOLD = 25
ADULT_PRIVILEGED_RACE = "White"
COMPAS_RACES = ("African-American", "Caucasian")  # two largest groups
COMPAS_PRIVILEGED_RACE = "Caucasian"


class IngestError(ValueError):
    pass


_GERMAN_COLUMNS = [
    ("checking_status", CATEGORICAL),
    ("duration", NUMERIC),
    ("credit_history", CATEGORICAL),
    ("purpose", CATEGORICAL),
    ("credit_amount", NUMERIC),
    ("savings_status", CATEGORICAL),
    ("employment", CATEGORICAL),
    ("installment_rate", NUMERIC),
    ("personal_status", CATEGORICAL),
    ("other_parties", CATEGORICAL),
    ("residence_since", NUMERIC),
    ("property_magnitude", CATEGORICAL),
    ("age", NUMERIC),
    ("other_payment_plans", CATEGORICAL),
    ("housing", CATEGORICAL),
    ("existing_credits", NUMERIC),
    ("job", CATEGORICAL),
    ("num_dependents", NUMERIC),
    ("own_telephone", CATEGORICAL),
    ("foreign_worker", CATEGORICAL),
]


def _build_dataset(frame: pd.DataFrame, kinds: dict[str, str], s, y, name: str) -> Dataset:
    columns = {}
    schema_cols = []
    for col_name in frame.columns:
        kind = kinds[col_name]
        if kind == NUMERIC:
            columns[col_name] = frame[col_name].to_numpy(dtype=np.float64)
            schema_cols.append(Column(col_name, NUMERIC))
        else:
            vals = frame[col_name].astype(str).to_numpy(dtype=object)
            columns[col_name] = vals
            vocab = []
            seen = set()
            for v in vals:
                if v not in seen:
                    vocab.append(v)
                    seen.add(v)
            schema_cols.append(Column(col_name, CATEGORICAL, tuple(vocab)))
    return Dataset(
        schema=FeatureSchema(tuple(schema_cols)),
        columns=columns,
        s=np.asarray(s, dtype=np.int8),
        y=np.asarray(y, dtype=np.int8),
        name=name,
    )


def load_german(path, age_threshold: int = GERMAN_AGE_THRESHOLD) -> Dataset:
    """Statlog German Credit: 1000 rows, 20 raw attributes. y = good credit;
    s = 1 iff age > age_threshold; the age column leaves the feature set."""
    path = Path(path)
    if path.is_dir():
        path = path / "german.data"
    names = [c for c, _ in _GERMAN_COLUMNS] + ["class"]
    try:
        frame = pd.read_csv(path, sep=r"\s+", header=None, names=names, dtype=str)
    except Exception as exc:
        raise IngestError(f"cannot parse {path}: {exc}") from exc
    if frame.isna().any().any():
        bad = int(frame.isna().any(axis=1).idxmax())
        raise IngestError(f"malformed row {bad} in {path}: wrong field count")
    kinds = dict(_GERMAN_COLUMNS)
    for col_name, kind in _GERMAN_COLUMNS:
        if kind == NUMERIC:
            try:
                frame[col_name] = frame[col_name].astype(np.float64)
            except ValueError as exc:
                bad = int(pd.to_numeric(frame[col_name], errors="coerce").isna().idxmax())
                raise IngestError(f"non-numeric {col_name!r} at row {bad} in {path}") from exc
    if not frame["class"].isin(["1", "2"]).all():
        bad = int((~frame["class"].isin(["1", "2"])).idxmax())
        raise IngestError(f"unexpected class value at row {bad} in {path}")
    y = (frame["class"] == "1").to_numpy(dtype=np.int8)  # 1 = good credit
    s = (frame["age"].to_numpy(dtype=np.float64) > age_threshold).astype(np.int8)
    features = frame.drop(columns=["age", "class"])
    return _build_dataset(features, kinds, s, y, "german")


_ADULT_COLUMNS = [
    ("age", NUMERIC),
    ("workclass", CATEGORICAL),
    ("fnlwgt", NUMERIC),
    ("education", CATEGORICAL),
    ("education_num", NUMERIC),
    ("marital_status", CATEGORICAL),
    ("occupation", CATEGORICAL),
    ("relationship", CATEGORICAL),
    ("race", CATEGORICAL),
    ("sex", CATEGORICAL),
    ("capital_gain", NUMERIC),
    ("capital_loss", NUMERIC),
    ("hours_per_week", NUMERIC),
    ("native_country", CATEGORICAL),
]


def load_adult(path, privileged_race: str = ADULT_PRIVILEGED_RACE) -> Dataset:
    """Adult census income (train + test parts). Rows containing the '?'
    missing marker are dropped; y = income above 50K; s = 1 iff race equals
    ``privileged_race``; the race column leaves the feature set."""
    path = Path(path)
    if path.is_dir():
        parts = [path / "adult.data", path / "adult.test"]
        missing = [str(p) for p in parts if not p.exists()]
        if missing:
            raise IngestError(f"missing raw file(s): {missing}")
    else:
        parts = [path]
    names = [c for c, _ in _ADULT_COLUMNS] + ["income"]
    frames = []
    for part in parts:
        try:
            frame = pd.read_csv(
                part, header=None, names=names, dtype=str, comment="|",
                skipinitialspace=True, skip_blank_lines=True,
            )
        except Exception as exc:
            raise IngestError(f"cannot parse {part}: {exc}") from exc
        frames.append(frame)
    frame = pd.concat(frames, ignore_index=True)
    frame = frame.apply(lambda c: c.str.strip())
    frame["income"] = frame["income"].str.rstrip(".")  # test-part labels end in '.'
    if not frame["income"].isin([">50K", "<=50K"]).all():
        bad = int((~frame["income"].isin([">50K", "<=50K"])).idxmax())
        raise IngestError(f"unexpected income value at row {bad}")
    frame = frame[~(frame == "?").any(axis=1)].reset_index(drop=True)
    kinds = dict(_ADULT_COLUMNS)
    for col_name, kind in _ADULT_COLUMNS:
        if kind == NUMERIC:
            try:
                frame[col_name] = frame[col_name].astype(np.float64)
            except ValueError as exc:
                bad = int(pd.to_numeric(frame[col_name], errors="coerce").isna().idxmax())
                raise IngestError(f"non-numeric {col_name!r} at row {bad}") from exc
    y = (frame["income"] == ">50K").to_numpy(dtype=np.int8)
    s = (frame["race"] == privileged_race).to_numpy(dtype=np.int8)
    features = frame.drop(columns=["race", "income"])
    return _build_dataset(features, kinds, s, y, "adult")


# The 11 raw COMPAS features (race included; it then leaves the feature set).
_COMPAS_NUMERIC = [
    "age",
    "juv_fel_count",
    "juv_misd_count",
    "juv_other_count",
    "priors_count",
    "days_b_screening_arrest",
    "length_of_stay",
]
_COMPAS_CATEGORICAL = ["sex", "age_cat", "c_charge_degree"]


def load_compas(path, races: tuple[str, str] = COMPAS_RACES,
                privileged_race: str = COMPAS_PRIVILEGED_RACE) -> Dataset:
    """ProPublica two-year recidivism file with the standard filter: valid
    screening window (|days_b_screening_arrest| <= 30), is_recid != -1,
    ordinary traffic offenses out, COMPAS-scored rows only; then restricted to
    the two largest race groups. y = two-year recidivism; s = 1 iff race
    equals ``privileged_race``."""
    path = Path(path)
    if path.is_dir():
        path = path / "compas-scores-two-years.csv"
    try:
        frame = pd.read_csv(path, dtype=str)
    except Exception as exc:
        raise IngestError(f"cannot parse {path}: {exc}") from exc
    required = {
        "days_b_screening_arrest", "is_recid", "c_charge_degree", "score_text",
        "race", "two_year_recid", "c_jail_in", "c_jail_out",
    } | set(_COMPAS_NUMERIC + _COMPAS_CATEGORICAL) - {"length_of_stay"}
    missing = sorted(required - set(frame.columns))
    if missing:
        raise IngestError(f"{path} lacks expected columns: {missing}")
    days = pd.to_numeric(frame["days_b_screening_arrest"], errors="coerce")
    keep = (
        days.notna()
        & (days <= 30)
        & (days >= -30)
        & (pd.to_numeric(frame["is_recid"], errors="coerce") != -1)
        & (frame["c_charge_degree"] != "O")
        & (frame["score_text"].notna())
        & (frame["score_text"] != "N/A")
        & frame["race"].isin(races)
    )
    frame = frame[keep].reset_index(drop=True)
    jail_in = pd.to_datetime(frame["c_jail_in"], errors="coerce")
    jail_out = pd.to_datetime(frame["c_jail_out"], errors="coerce")
    stay = (jail_out - jail_in).dt.total_seconds() / 86400.0
    frame["length_of_stay"] = stay.fillna(0.0)
    kinds = {c: NUMERIC for c in _COMPAS_NUMERIC}
    kinds.update({c: CATEGORICAL for c in _COMPAS_CATEGORICAL})
    for col_name in _COMPAS_NUMERIC:
        coerced = pd.to_numeric(frame[col_name], errors="coerce")
        if coerced.isna().any():
            bad = int(coerced.isna().idxmax())
            raise IngestError(f"non-numeric {col_name!r} at row {bad} in {path}")
        frame[col_name] = coerced.astype(np.float64)
    y = pd.to_numeric(frame["two_year_recid"]).to_numpy(dtype=np.int8)
    s = (frame["race"] == privileged_race).to_numpy(dtype=np.int8)
    features = frame[_COMPAS_NUMERIC + _COMPAS_CATEGORICAL]
    return _build_dataset(features, kinds, s, y, "compas")


@dataclass(frozen=True)
class SyntheticSpec:
    """Two-knob generator: rho couples the features to s, bias couples y to s."""

    n: int = 4000
    d_num: int = 4
    rho: float = 1.0
    bias: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 4:
            raise ValueError(f"n must be >= 4, got {self.n}")
        if self.d_num < 1:
            raise ValueError(f"d_num must be >= 1, got {self.d_num}")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must be in [0, 1], got {self.rho}")
        if not 0.0 <= self.bias <= 1.0:
            raise ValueError(f"bias must be in [0, 1], got {self.bias}")


# Proxy geometry: a _TAIL_FRACTION of instances carry a margin-2 group
# signature on feature x0 (at rho = 1 its sign equals s outright), the rest
# form an ambiguous core where x0 is pure noise. Predicting s therefore tops
# out at _TAIL_FRACTION + (1 - _TAIL_FRACTION)/2 = 0.995 at rho = 1, while the
# core keeps a genuinely ambiguous subpopulation alive at every rho: the
# regime the whole pipeline is about.
_TAIL_FRACTION = 0.99
_TAIL_MARGIN = 2.0
# Acceptance-rate gap of the labels is exactly 0.8 * bias: a (0.8 * bias)
# fraction of labels copy s outright, the rest follow the legitimate signal.
# Marginals work out to P(y=1|s) = 0.5 +- 0.4 * bias.
_MAX_RATE_GAP = 0.8
_LEGIT_SLOPE = 2.0


def gen_synthetic(spec: SyntheticSpec) -> Dataset:
    """Feature x0 is the sensitive proxy: group-mean gap exactly proportional
    to rho, a hard +-(2+|N|) signature for tail instances at rho = 1, noise
    for the ambiguous core. Remaining features are s-independent legitimate
    signal. Labels are a mixture: with probability 0.8 * bias they copy s,
    otherwise they follow a logistic rule on the legitimate features only, so
    the group acceptance-rate gap is exactly 0.8 * bias."""
    rng = np.random.default_rng(spec.seed)
    s = rng.integers(0, 2, size=spec.n).astype(np.int8)
    sign = 2.0 * s - 1.0
    in_tail = rng.random(spec.n) < _TAIL_FRACTION
    signature = _TAIL_MARGIN + np.abs(rng.normal(size=spec.n))
    X = rng.normal(size=(spec.n, spec.d_num))
    rho_tail = spec.rho * in_tail
    X[:, 0] = rho_tail * sign * signature + (1.0 - rho_tail) * X[:, 0]
    n_legit = spec.d_num - 1
    if n_legit:
        legit = X[:, 1:].sum(axis=1) / np.sqrt(n_legit)
        p_legit = 1.0 / (1.0 + np.exp(-_LEGIT_SLOPE * legit))
    else:
        p_legit = np.full(spec.n, 0.5)
    from_rule = rng.random(spec.n) < _MAX_RATE_GAP * spec.bias
    y = np.where(from_rule, s, (rng.random(spec.n) < p_legit)).astype(np.int8)
    schema = FeatureSchema(tuple(Column(f"x{j}", NUMERIC) for j in range(spec.d_num)))
    columns = {f"x{j}": X[:, j] for j in range(spec.d_num)}
    name = f"synthetic(n={spec.n},d={spec.d_num},rho={spec.rho},bias={spec.bias},seed={spec.seed})"
    return Dataset(schema=schema, columns=columns, s=s, y=y, name=name)
