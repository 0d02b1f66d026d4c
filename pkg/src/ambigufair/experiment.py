"""End-to-end procedure: split, halve, train the attribute ensemble, filter
the task pool by uncertainty, train the final classifier, evaluate every
method over repetitions and a threshold grid, aggregate and export.

Every repetition derives its own seeds from (base_seed, rep, role), so records
are identical no matter in which order, or on how many worker processes,
cells are computed.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import ensemble as nbe_mod
from . import learners, metrics
from .data import Dataset, encode, fit_encoding, split_d1_d2, split_train_test
from .interventions import apply_thresholds, equalize_tpr_thresholds, reweigh
from .kernels import active_backend

METHODS = ("ours", "unconstrained", "rw", "pp")
DEFAULT_THRESHOLDS = tuple(round(0.05 * k, 2) for k in range(11))  # 0.0 .. 0.5
RESULTS_FORMAT_VERSION = 1

CSV_COLUMNS = [
    "dataset", "model", "method", "threshold", "rep", "seed", "accuracy",
    "dp", "eop", "n_train", "mean_uncertainty", "nbe_accuracy", "flags",
]


class ConfigError(ValueError):
    pass


class FilterTooHard(RuntimeError):
    """The uncertainty filter left too few (or single-class) training rows."""


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str
    model: str = "lr"
    n_members: int = nbe_mod.DEFAULT_MEMBERS
    thresholds: tuple = DEFAULT_THRESHOLDS
    reps: int = 10
    base_seed: int = 0
    methods: tuple = METHODS
    min_train: int = 30
    aggregation: str = nbe_mod.VOTE
    train_fraction: float = 0.7
    classifier: dict | None = None  # overrides applied onto the kind defaults

    def __post_init__(self):
        object.__setattr__(self, "thresholds", tuple(float(u) for u in self.thresholds))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.model not in learners.KINDS:
            raise ConfigError(f"unknown model {self.model!r}; expected one of {learners.KINDS}")
        if not self.thresholds:
            raise ConfigError("need at least one uncertainty threshold")
        for u in self.thresholds:
            if not 0.0 <= u <= 0.5:
                raise ConfigError(f"thresholds must lie in [0, 0.5], got {u}")
        if list(self.thresholds) != sorted(self.thresholds):
            raise ConfigError("thresholds must be ascending")
        if self.reps < 1:
            raise ConfigError(f"reps must be >= 1, got {self.reps}")
        if self.n_members < 1:
            raise ConfigError(f"B must be >= 1, got {self.n_members}")
        if self.min_train < 1:
            raise ConfigError(f"min_train must be >= 1, got {self.min_train}")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError(f"unknown methods {bad}; expected a subset of {METHODS}")
        if not self.methods:
            raise ConfigError("need at least one method")
        if self.aggregation not in nbe_mod.AGGREGATIONS:
            raise ConfigError(f"unknown aggregation {self.aggregation!r}")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(f"train fraction must be in (0, 1), got {self.train_fraction}")

    def classifier_config(self, seed: int) -> learners.ClassifierConfig:
        overrides = dict(self.classifier or {})
        return learners.default_config(self.model, seed=seed, **overrides)

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["thresholds"] = list(self.thresholds)
        doc["methods"] = list(self.methods)
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        if "thresholds" in doc:
            doc["thresholds"] = tuple(doc["thresholds"])
        if "methods" in doc:
            doc["methods"] = tuple(doc["methods"])
        return cls(**doc)


@dataclass(frozen=True)
class Record:
    dataset: str
    model: str
    method: str
    threshold: float | None
    rep: int
    seed: int
    accuracy: float
    dp: float | None
    eop: float | None
    n_train: int
    mean_uncertainty: float
    nbe_accuracy: float
    flags: tuple = ()


@dataclass(frozen=True)
class CellError:
    method: str
    threshold: float | None
    rep: int
    message: str


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    records: tuple
    errors: tuple
    aggregates: list = field(default_factory=list)


# Roles for per-repetition seed derivation.
_ROLE_SPLIT, _ROLE_HALVE, _ROLE_NBE, _ROLE_FINAL = 0, 1, 2, 3


def derive_seed(base_seed: int, rep: int, role: int) -> int:
    ss = np.random.SeedSequence(entropy=base_seed, spawn_key=(rep, role))
    return int(ss.generate_state(1, np.uint64)[0])


def build_nonnormative(
    d2: Dataset,
    nbe: nbe_mod.NormBreakerEnsemble,
    threshold: float,
    min_train: int = 1,
    uncertainties: np.ndarray | None = None,
) -> Dataset:
    """Rows of d2 whose uncertainty is >= threshold, order preserved.

    ``uncertainties`` short-circuits rescoring when the caller already holds
    u for d2. Raises FilterTooHard when fewer than ``min_train`` rows survive
    or the surviving labels are single-class.
    """
    if not 0.0 <= threshold <= 0.5:
        raise ValueError(f"uncertainty threshold must lie in [0, 0.5], got {threshold}")
    if uncertainties is None:
        uncertainties = nbe_mod.uncertainty(nbe_mod.score_dataset(nbe, d2))
    u = np.asarray(uncertainties, dtype=np.float64)
    if len(u) != d2.n_rows:
        raise ValueError("uncertainty vector does not match d2")
    keep = np.flatnonzero(u >= threshold)
    if len(keep) < min_train:
        raise FilterTooHard(
            f"filter at U={threshold} kept {len(keep)} rows < min_train={min_train}"
        )
    subset = d2.subset(keep, name=f"{d2.name}/U>={threshold}")
    if len(np.unique(subset.require_y())) < 2:
        raise FilterTooHard(f"filter at U={threshold} left a single-class pool")
    return subset


def _fit_and_score(config, model_seed, train: Dataset, test: Dataset, weights=None):
    """Encode on the training rows only, fit the final classifier and return
    its probability scores on the test rows."""
    params = fit_encoding(train)
    model = learners.fit(
        config.classifier_config(model_seed), encode(train, params), train.require_y(),
        weights,
    )
    return model, learners.predict_proba(model, encode(test, params)), params


def run_repetition(data: Dataset, config: ExperimentConfig, rep: int):
    """All (method, threshold) records for one repetition."""
    seed_split = derive_seed(config.base_seed, rep, _ROLE_SPLIT)
    seed_halve = derive_seed(config.base_seed, rep, _ROLE_HALVE)
    seed_nbe = derive_seed(config.base_seed, rep, _ROLE_NBE)
    seed_final = derive_seed(config.base_seed, rep, _ROLE_FINAL)

    train, test = split_train_test(data, config.train_fraction, seed_split)
    d1, d2 = split_d1_d2(train, seed_halve)
    nbe = nbe_mod.nbe_fit(
        d1,
        config.classifier_config(seed_nbe),
        n_members=config.n_members,
        seed=seed_nbe,
        aggregation=config.aggregation,
    )
    q_d2 = nbe_mod.score_dataset(nbe, d2)
    u_d2 = nbe_mod.uncertainty(q_d2)
    mean_u, nbe_acc = nbe_mod.nbe_diagnostics(nbe, d2, q=q_d2)

    y_test = test.require_y()
    s_test = test.require_s()
    records, errors = [], []

    def add(method, threshold, rep_report, n_train):
        records.append(
            Record(
                dataset=data.name, model=config.model, method=method,
                threshold=threshold, rep=rep, seed=seed_split,
                accuracy=rep_report.accuracy, dp=rep_report.dp, eop=rep_report.eop,
                n_train=n_train, mean_uncertainty=mean_u, nbe_accuracy=nbe_acc,
                flags=rep_report.undefined,
            )
        )

    for method in config.methods:
        try:
            if method == "ours":
                for threshold in config.thresholds:
                    try:
                        pool = build_nonnormative(
                            d2, nbe, threshold, config.min_train, uncertainties=u_d2
                        )
                        _, scores, _ = _fit_and_score(config, seed_final, pool, test)
                        yhat = (scores >= 0.5).astype(np.int8)
                        add(method, threshold, metrics.report(yhat, y_test, s_test),
                            pool.n_rows)
                    except FilterTooHard as exc:
                        errors.append(CellError(method, threshold, rep, str(exc)))
            elif method == "unconstrained":
                _, scores, _ = _fit_and_score(config, seed_final, d2, test)
                yhat = (scores >= 0.5).astype(np.int8)
                add(method, None, metrics.report(yhat, y_test, s_test), d2.n_rows)
            elif method == "rw":
                weights = reweigh(d2.require_s(), d2.require_y())
                _, scores, _ = _fit_and_score(config, seed_final, d2, test, weights)
                yhat = (scores >= 0.5).astype(np.int8)
                add(method, None, metrics.report(yhat, y_test, s_test), d2.n_rows)
            elif method == "pp":
                model, scores, params = _fit_and_score(config, seed_final, d2, test)
                train_scores = learners.predict_proba(model, encode(d2, params))
                cuts = equalize_tpr_thresholds(
                    train_scores, d2.require_y(), d2.require_s()
                )
                yhat = apply_thresholds(scores, s_test, cuts)
                add(method, None, metrics.report(yhat, y_test, s_test), d2.n_rows)
        except (ValueError, RuntimeError) as exc:
            errors.append(CellError(method, None, rep, str(exc)))
    return records, errors


def run_condition(method: str, data: Dataset, config: ExperimentConfig, rep: int):
    """Records for a single method in one repetition.

    Seeds derive from (base_seed, rep, role) alone, so the records are
    identical to the ones a full multi-method run produces for this method.
    """
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}; expected one of {METHODS}")
    narrowed = ExperimentConfig(**{**config.to_dict(), "methods": (method,)})
    return run_repetition(data, narrowed, rep)


def _sort_key(record: Record):
    return (
        record.method,
        -1.0 if record.threshold is None else record.threshold,
        record.rep,
    )


def run_experiment(data: Dataset, config: ExperimentConfig, jobs: int = 1) -> ExperimentResult:
    """Every (method, threshold, repetition) cell; output is independent of
    job count and of the order methods were listed in."""
    reps = range(config.reps)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_rep_worker, [(data, config, r) for r in reps]))
    else:
        outcomes = [run_repetition(data, config, r) for r in reps]
    records, errors = [], []
    for recs, errs in outcomes:
        records.extend(recs)
        errors.extend(errs)
    records.sort(key=_sort_key)
    errors.sort(key=lambda e: (e.method, -1.0 if e.threshold is None else e.threshold, e.rep))
    result = ExperimentResult(
        config=config, records=tuple(records), errors=tuple(errors)
    )
    result.aggregates.extend(aggregate_records(records))
    return result


def _rep_worker(args):
    data, config, rep = args
    return run_repetition(data, config, rep)


_AGG_METRICS = ("accuracy", "dp", "eop", "n_train", "mean_uncertainty", "nbe_accuracy")


def aggregate_records(records) -> list:
    """Per-(method, threshold) mean and population std of every metric.

    Repetitions whose dp/eop were flagged undefined are excluded from that
    metric's aggregate; the exclusion count is reported alongside.
    """
    cells: dict = {}
    for r in records:
        cells.setdefault((r.method, r.threshold), []).append(r)
    out = []
    for (method, threshold), cell in sorted(
        cells.items(), key=lambda kv: (kv[0][0], -1.0 if kv[0][1] is None else kv[0][1])
    ):
        stats = {}
        for name in _AGG_METRICS:
            values = [getattr(r, name) for r in cell]
            defined = [v for v in values if v is not None]
            excluded = len(values) - len(defined)
            if defined:
                arr = np.asarray(defined, dtype=np.float64)
                stats[name] = {
                    "mean": float(arr.mean()),
                    "std": float(arr.std()),
                    "count": len(defined),
                    "excluded": excluded,
                }
            else:
                stats[name] = {"mean": None, "std": None, "count": 0, "excluded": excluded}
        out.append(
            {"method": method, "threshold": threshold, "n_records": len(cell),
             "metrics": stats}
        )
    return out


# ---------------------------------------------------------------------------
# Attribute-ensemble diagnostics over repetitions (no final classifier).


def run_diagnostics(data: Dataset, config: ExperimentConfig) -> dict:
    """Mean +- std of the ensemble's mean uncertainty and accuracy on the task
    pool, over the same splits the experiment itself would draw."""
    mean_us, accs = [], []
    for rep in range(config.reps):
        seed_split = derive_seed(config.base_seed, rep, _ROLE_SPLIT)
        seed_halve = derive_seed(config.base_seed, rep, _ROLE_HALVE)
        seed_nbe = derive_seed(config.base_seed, rep, _ROLE_NBE)
        train, _ = split_train_test(data, config.train_fraction, seed_split)
        d1, d2 = split_d1_d2(train, seed_halve)
        nbe = nbe_mod.nbe_fit(
            d1, config.classifier_config(seed_nbe), n_members=config.n_members,
            seed=seed_nbe, aggregation=config.aggregation,
        )
        mean_u, acc = nbe_mod.nbe_diagnostics(nbe, d2)
        mean_us.append(mean_u)
        accs.append(acc)
    mean_us = np.asarray(mean_us)
    accs = np.asarray(accs)
    return {
        "dataset": data.name,
        "model": config.model,
        "reps": config.reps,
        "mean_uncertainty": {"mean": float(mean_us.mean()), "std": float(mean_us.std())},
        "nbe_accuracy": {"mean": float(accs.mean()), "std": float(accs.std())},
        "per_rep": {"mean_uncertainty": mean_us.tolist(), "nbe_accuracy": accs.tolist()},
    }


# ---------------------------------------------------------------------------
# Export


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def records_to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow(
            [
                r.dataset, r.model, r.method, _fmt(r.threshold), r.rep, r.seed,
                _fmt(r.accuracy), _fmt(r.dp), _fmt(r.eop), r.n_train,
                _fmt(r.mean_uncertainty), _fmt(r.nbe_accuracy), "|".join(r.flags),
            ]
        )
    return buf.getvalue()


def result_to_dict(result: ExperimentResult) -> dict:
    from . import __version__

    return {
        "format_version": RESULTS_FORMAT_VERSION,
        "versions": {
            "package": __version__,
            "defaults": learners.DEFAULTS_VERSION,
            "kernel_backend": active_backend(),
        },
        "config": result.config.to_dict(),
        "records": [asdict(r) | {"flags": list(r.flags)} for r in result.records],
        "errors": [asdict(e) for e in result.errors],
        "aggregates": result.aggregates,
    }


def export_results(result: ExperimentResult, out_dir) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "results.csv"
    json_path = out_dir / "results.json"
    csv_path.write_text(records_to_csv(result.records))
    json_path.write_text(
        json.dumps(result_to_dict(result), indent=2, sort_keys=True) + "\n"
    )
    return csv_path, json_path


def load_results(json_path) -> ExperimentResult:
    with open(json_path) as fh:
        doc = json.load(fh)
    if doc.get("format_version") != RESULTS_FORMAT_VERSION:
        raise ValueError(f"unsupported results format {doc.get('format_version')!r}")
    records = tuple(
        Record(**{**r, "flags": tuple(r["flags"]), "threshold": r["threshold"]})
        for r in doc["records"]
    )
    errors = tuple(CellError(**e) for e in doc["errors"])
    result = ExperimentResult(
        config=ExperimentConfig.from_dict(doc["config"]), records=records, errors=errors
    )
    result.aggregates.extend(doc["aggregates"])
    return result
