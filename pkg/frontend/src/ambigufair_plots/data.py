"""Loading and aggregating the experiment runner's results.csv export."""

from __future__ import annotations

import numpy as np
import pandas as pd

# The exporter's declared column order; renderers refuse anything else.
CSV_COLUMNS = [
    "dataset", "model", "method", "threshold", "rep", "seed", "accuracy",
    "dp", "eop", "n_train", "mean_uncertainty", "nbe_accuracy", "flags",
]

METRICS = ("dp", "eop")


class SchemaMismatch(ValueError):
    """The CSV does not carry the declared export schema."""


def load_results_csv(path) -> pd.DataFrame:
    frame = pd.read_csv(path, dtype={"flags": str}, keep_default_na=True)
    got = list(frame.columns)
    if got != CSV_COLUMNS:
        offending = [c for c in got if c not in CSV_COLUMNS] or [
            c for c in CSV_COLUMNS if c not in got
        ]
        raise SchemaMismatch(
            f"results.csv columns {got} do not match the export schema; "
            f"offending column(s): {offending}"
        )
    frame["flags"] = frame["flags"].fillna("")
    return frame


def _defined(frame: pd.DataFrame, metric: str) -> pd.DataFrame:
    """Rows whose ``metric`` was not flagged undefined (NaN-free by design)."""
    flagged = frame["flags"].str.split("|").apply(lambda fs: metric in fs)
    return frame[~flagged & frame[metric].notna()]


def curve_stats(frame: pd.DataFrame, metric: str) -> pd.DataFrame:
    """Per-threshold mean/std of ``metric`` for the filtered-training method,
    computed exactly the way the exporter aggregates (population std,
    flagged repetitions excluded)."""
    ours = _defined(frame[frame["method"] == "ours"], metric)
    if ours.empty:
        return pd.DataFrame(columns=["threshold", "mean", "std", "n"])
    grouped = ours.groupby("threshold")[metric]
    out = pd.DataFrame(
        {
            "mean": grouped.mean(),
            "std": grouped.apply(lambda v: float(np.std(v))),
            "n": grouped.size(),
        }
    ).reset_index()
    return out.sort_values("threshold").reset_index(drop=True)


def baseline_stats(frame: pd.DataFrame, metric: str) -> dict[str, tuple[float, float]]:
    """method -> (mean, std) for the unfiltered reference arms."""
    out = {}
    for method in ("unconstrained", "rw", "pp"):
        rows = _defined(frame[frame["method"] == method], metric)
        if not rows.empty:
            values = rows[metric].to_numpy(dtype=float)
            out[method] = (float(values.mean()), float(np.std(values)))
    return out


def panels(frame: pd.DataFrame) -> list[tuple[str, str, pd.DataFrame]]:
    """One (dataset, model) panel per sweep present in the export."""
    out = []
    for (dataset, model), chunk in frame.groupby(["dataset", "model"], sort=True):
        out.append((str(dataset), str(model), chunk))
    return out
