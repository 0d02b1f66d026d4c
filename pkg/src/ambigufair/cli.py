"""Command-line surface: prepare raw data, run experiments, print ensemble
diagnostics.

Exit codes: 0 success, 1 runtime failure (missing files, training errors),
2 usage or configuration errors. Flags override values from --config.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import ingest
from .data import load_canonical, save_canonical
from .experiment import (
    DEFAULT_THRESHOLDS,
    METHODS,
    ConfigError,
    ExperimentConfig,
    export_results,
    run_diagnostics,
    run_experiment,
)

ENV_DATA_DIR = "AMBIGUFAIR_DATA_DIR"

_LOADERS = {
    "german": ingest.load_german,
    "adult": ingest.load_adult,
    "compas": ingest.load_compas,
}

_HARD_DEFAULTS = dict(
    dataset=None,
    model="lr",
    methods=",".join(METHODS),
    thresholds=",".join(str(u) for u in DEFAULT_THRESHOLDS),
    reps=10,
    seed=0,
    B=50,
    out="results",
    data_dir=None,
    jobs=1,
    min_train=30,
    aggregation="vote",
    synth_n=4000,
    synth_d=4,
    synth_rho=1.0,
    synth_bias=1.0,
    synth_seed=12345,
)


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", help="german | adult | compas | synthetic")
    p.add_argument("--model", help="lr | svm | gbdt")
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--B", type=int, dest="B", help="ensemble size")
    p.add_argument("--out", help="output directory")
    p.add_argument("--data-dir", dest="data_dir",
                   help=f"canonical data directory (default ${ENV_DATA_DIR} or ./data)")
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--jobs", type=int, help="worker processes (results identical for any value)")
    p.add_argument("--min-train", type=int, dest="min_train")
    p.add_argument("--aggregation", choices=["vote", "mean-probability"])
    p.add_argument("--synth-n", type=int, dest="synth_n")
    p.add_argument("--synth-d", type=int, dest="synth_d")
    p.add_argument("--synth-rho", type=float, dest="synth_rho")
    p.add_argument("--synth-bias", type=float, dest="synth_bias")
    p.add_argument("--synth-seed", type=int, dest="synth_seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ambigufair",
        description="Fairness through ambiguity: experiments and baselines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_prep = sub.add_parser("prepare", help="convert a raw distribution file to canonical form")
    p_prep.add_argument("--raw", required=True, help="path to the raw file or its directory")
    p_prep.add_argument("--dataset", required=True, help="german | adult | compas")
    p_prep.add_argument("--out", help="output directory (default: the data dir)")
    p_prep.add_argument("--data-dir", dest="data_dir")

    p_run = sub.add_parser("run", help="run the full experiment sweep")
    _experiment_flags(p_run)
    p_run.add_argument("--methods", help="comma list from: " + ",".join(METHODS))
    p_run.add_argument("--thresholds", help="comma list of uncertainty thresholds in [0, 0.5]")

    p_diag = sub.add_parser("diagnose", help="ensemble uncertainty/accuracy diagnostics")
    _experiment_flags(p_diag)

    return parser


def _merged_options(args: argparse.Namespace) -> dict:
    merged = dict(_HARD_DEFAULTS)
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            with open(config_path) as fh:
                file_values = json.load(fh)
        except OSError as exc:
            raise CliError(f"cannot read config file {config_path}: {exc}", 1)
        except json.JSONDecodeError as exc:
            raise CliError(f"config file {config_path} is not valid JSON: {exc}", 2)
        unknown = set(file_values) - set(_HARD_DEFAULTS)
        if unknown:
            raise CliError(f"unknown config keys {sorted(unknown)}", 2)
        merged.update(file_values)
    for key in _HARD_DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    return merged


def _parse_list(raw, cast):
    if isinstance(raw, str):
        parts = [p for p in raw.split(",") if p != ""]
    else:
        parts = list(raw)
    return tuple(cast(p) for p in parts)


def _experiment_config(opts: dict) -> ExperimentConfig:
    if not opts.get("dataset"):
        raise CliError("--dataset is required (german | adult | compas | synthetic)", 2)
    try:
        thresholds = _parse_list(opts["thresholds"], float)
        methods = _parse_list(opts["methods"], str)
    except ValueError as exc:
        raise CliError(f"bad flag value: {exc}", 2)
    try:
        return ExperimentConfig(
            dataset=opts["dataset"],
            model=opts["model"],
            n_members=int(opts["B"]),
            thresholds=thresholds,
            reps=int(opts["reps"]),
            base_seed=int(opts["seed"]),
            methods=methods,
            min_train=int(opts["min_train"]),
            aggregation=opts["aggregation"],
        )
    except (ConfigError, ValueError) as exc:
        raise CliError(str(exc), 2)


def _data_dir(opts: dict) -> Path:
    configured = opts.get("data_dir") or os.environ.get(ENV_DATA_DIR) or "data"
    return Path(configured)


def _load_dataset(opts: dict):
    name = opts["dataset"]
    if name == "synthetic":
        try:
            spec = ingest.SyntheticSpec(
                n=int(opts["synth_n"]), d_num=int(opts["synth_d"]),
                rho=float(opts["synth_rho"]), bias=float(opts["synth_bias"]),
                seed=int(opts["synth_seed"]),
            )
        except ValueError as exc:
            raise CliError(str(exc), 2)
        return ingest.gen_synthetic(spec)
    base = _data_dir(opts)
    csv_path = base / f"{name}.csv"
    schema_path = base / f"{name}.schema.json"
    if not csv_path.exists() or not schema_path.exists():
        source = ingest.RAW_SOURCES.get(name, {})
        raise CliError(
            f"prepared data not found at {csv_path}; run `ambigufair prepare "
            f"--raw <file> --dataset {name}` first (raw files: {source})",
            1,
        )
    return load_canonical(csv_path, schema_path)


def cmd_prepare(args: argparse.Namespace) -> int:
    name = args.dataset
    if name not in _LOADERS:
        raise CliError(
            f"unknown dataset {name!r}; prepare handles {sorted(_LOADERS)}", 2
        )
    raw = Path(args.raw)
    if not raw.exists():
        raise CliError(f"raw file not found: {raw}", 1)
    try:
        data = _LOADERS[name](raw)
    except ingest.IngestError as exc:
        raise CliError(str(exc), 1)
    out_dir = Path(args.out) if args.out else _data_dir(vars(args))
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{name}.csv"
    schema_path = out_dir / f"{name}.schema.json"
    save_canonical(data, csv_path, schema_path)
    print(f"{name}: {data.n_rows} rows, {len(data.schema.columns)} features "
          f"-> {csv_path}, {schema_path}")
    return 0


def _print_summary(result) -> None:
    print(f"{'method':<14}{'U':>6}  {'accuracy':>18}  {'dp':>18}  {'eop':>18}")
    for row in result.aggregates:
        u = "" if row["threshold"] is None else f"{row['threshold']:.2f}"
        cells = []
        for name in ("accuracy", "dp", "eop"):
            stat = row["metrics"][name]
            if stat["mean"] is None:
                cells.append(f"{'undefined':>18}")
            else:
                cells.append(f"{stat['mean']:>10.4f} ±{stat['std']:.4f}")
        print(f"{row['method']:<14}{u:>6}  " + "  ".join(cells))
    if result.errors:
        print(f"({len(result.errors)} infeasible cells recorded; see results.json)")


def cmd_run(args: argparse.Namespace) -> int:
    opts = _merged_options(args)
    config = _experiment_config(opts)
    data = _load_dataset(opts)
    try:
        result = run_experiment(data, config, jobs=int(opts["jobs"]))
    except Exception as exc:
        raise CliError(f"experiment failed: {exc}", 1)
    if not result.records:
        print("warning: sweep produced no records (all cells infeasible)", file=sys.stderr)
    csv_path, json_path = export_results(result, opts["out"])
    _print_summary(result)
    print(f"wrote {csv_path} and {json_path}")
    return 0


def cmd_diagnose(args: argparse.Namespace) -> int:
    opts = _merged_options(args)
    models = ["lr", "svm", "gbdt"] if opts["model"] == "all" else [opts["model"]]
    base = _experiment_config({**opts, "model": models[0]})
    data = _load_dataset(opts)
    out_dir = Path(opts["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for model in models:
        try:
            config = ExperimentConfig(**{**base.to_dict(), "model": model})
            diag = run_diagnostics(data, config)
        except Exception as exc:
            raise CliError(f"diagnostics failed: {exc}", 1)
        rows.append(diag)
        print(
            f"{opts['dataset']:<10}{model:<6}"
            f"uncertainty={diag['mean_uncertainty']['mean']:.4f}"
            f"±{diag['mean_uncertainty']['std']:.4f}  "
            f"accuracy={diag['nbe_accuracy']['mean']:.4f}"
            f"±{diag['nbe_accuracy']['std']:.4f}"
        )
    out = out_dir / "diagnostics.csv"
    with open(out, "w") as fh:
        fh.write("dataset,model,reps,mean_uncertainty,mean_uncertainty_std,"
                 "nbe_accuracy,nbe_accuracy_std\n")
        for diag in rows:
            fh.write(
                f"{opts['dataset']},{diag['model']},{diag['reps']},"
                f"{diag['mean_uncertainty']['mean']!r},{diag['mean_uncertainty']['std']!r},"
                f"{diag['nbe_accuracy']['mean']!r},{diag['nbe_accuracy']['std']!r}\n"
            )
    print(f"wrote {out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "prepare":
            return cmd_prepare(args)
        if args.command == "run":
            return cmd_run(args)
        if args.command == "diagnose":
            return cmd_diagnose(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    parser.error(f"unknown command {args.command!r}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
