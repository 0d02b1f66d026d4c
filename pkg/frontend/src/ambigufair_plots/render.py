"""Figure rendering and the `ambigufair-render` command line.

Outputs are byte-reproducible: fixed style, fixed SVG hash salt, no embedded
dates. Curves show the threshold sweep with a +-band * std region; baselines
appear as horizontal reference lines (curves) or single markers (trade-off).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .data import METRICS, SchemaMismatch, baseline_stats, curve_stats, load_results_csv, panels

BASELINE_STYLE = {
    "unconstrained": dict(color="#555555", linestyle="--"),
    "rw": dict(color="#1b7837", linestyle="-."),
    "pp": dict(color="#762a83", linestyle=":"),
}
OURS_COLOR = "#2166ac"


@dataclass(frozen=True)
class PlotSpec:
    csv: Path
    out_dir: Path
    metric: str | None = None  # None renders both dp and eop
    band: float = 1.0
    image_format: str = "png"

    def __post_init__(self):
        if self.metric is not None and self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.band < 0:
            raise ValueError(f"band must be >= 0, got {self.band}")
        if self.image_format not in ("png", "svg"):
            raise ValueError(f"format must be png or svg, got {self.image_format!r}")


def _apply_style():
    plt.rcParams.update(
        {
            "figure.figsize": (4.2, 3.2),
            "figure.dpi": 110,
            "savefig.dpi": 110,
            "font.size": 9,
            "svg.hashsalt": "ambigufair",
            "axes.grid": True,
            "grid.alpha": 0.3,
        }
    )


def _save(fig, path: Path, image_format: str):
    # metadata pinned so reruns are byte-identical
    if image_format == "svg":
        fig.savefig(path, format="svg", metadata={"Date": None})
    else:
        fig.savefig(path, format="png", metadata={"Software": "ambigufair-plots"})
    plt.close(fig)


def _slug(name: str) -> str:
    keep = [c if (c.isalnum() or c in "-_") else "-" for c in name]
    return "".join(keep).strip("-") or "dataset"


def render_curves(spec: PlotSpec) -> list[Path]:
    """One image per (dataset, model, metric): mean +- band * std of the
    filtered-training sweep over the threshold grid, baselines as lines."""
    _apply_style()
    frame = load_results_csv(spec.csv)
    metrics = [spec.metric] if spec.metric else list(METRICS)
    written = []
    for dataset, model, chunk in panels(frame):
        for metric in metrics:
            curve = curve_stats(chunk, metric)
            refs = baseline_stats(chunk, metric)
            if curve.empty and not refs:
                print(f"warning: no defined {metric} rows for {dataset}/{model}",
                      file=sys.stderr)
                continue
            fig, ax = plt.subplots()
            if not curve.empty:
                u = curve["threshold"].to_numpy()
                mean = curve["mean"].to_numpy()
                std = curve["std"].to_numpy()
                ax.plot(u, mean, color=OURS_COLOR, marker="o", markersize=3,
                        label="uncertainty-filtered")
                if spec.band > 0:
                    ax.fill_between(u, mean - spec.band * std, mean + spec.band * std,
                                    color=OURS_COLOR, alpha=0.2, linewidth=0)
            for method, (ref_mean, _) in sorted(refs.items()):
                ax.axhline(ref_mean, label=method, **BASELINE_STYLE[method])
            ax.set_xlabel("uncertainty threshold")
            ax.set_ylabel(metric.upper())
            ax.set_title(f"{dataset} / {model}")
            ax.legend(fontsize=7)
            path = spec.out_dir / f"{_slug(dataset)}_{model}_{metric}.{spec.image_format}"
            _save(fig, path, spec.image_format)
            written.append(path)
    if not written:
        print("warning: CSV has no rows to plot", file=sys.stderr)
    return written


def render_tradeoff(spec: PlotSpec) -> list[Path]:
    """One panel per (dataset, model): accuracy against EOp across the
    threshold sweep, baselines as single markers."""
    _apply_style()
    frame = load_results_csv(spec.csv)
    written = []
    for dataset, model, chunk in panels(frame):
        eop = curve_stats(chunk, "eop")
        acc = curve_stats(chunk, "accuracy")
        merged = eop.merge(acc, on="threshold", suffixes=("_eop", "_acc"))
        refs_eop = baseline_stats(chunk, "eop")
        refs_acc = baseline_stats(chunk, "accuracy")
        if merged.empty and not refs_eop:
            print(f"warning: no defined trade-off rows for {dataset}/{model}",
                  file=sys.stderr)
            continue
        fig, ax = plt.subplots()
        if not merged.empty:
            ax.plot(merged["mean_eop"], merged["mean_acc"], color=OURS_COLOR,
                    marker="o", markersize=3, label="uncertainty-filtered")
        for method in ("unconstrained", "rw", "pp"):
            if method in refs_eop and method in refs_acc:
                ax.scatter([refs_eop[method][0]], [refs_acc[method][0]],
                           color=BASELINE_STYLE[method]["color"], marker="s",
                           s=25, label=method, zorder=3)
            elif method == "pp":
                print(f"warning: no pp rows for {dataset}/{model}; marker omitted",
                      file=sys.stderr)
        ax.set_xlabel("EOp")
        ax.set_ylabel("accuracy")
        ax.set_title(f"{dataset} / {model}")
        ax.legend(fontsize=7)
        path = spec.out_dir / f"{_slug(dataset)}_{model}_tradeoff.{spec.image_format}"
        _save(fig, path, spec.image_format)
        written.append(path)
    return written


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ambigufair-render",
        description="Render curve and trade-off figures from a results.csv export.",
    )
    parser.add_argument("--csv", required=True, help="path to results.csv")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--metric", choices=list(METRICS),
                        help="render only this metric's curves (default: both)")
    parser.add_argument("--band", type=float, default=1.0,
                        help="shaded band half-width in std units (default 1.0)")
    parser.add_argument("--format", choices=["png", "svg"], default="png",
                        dest="image_format")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = PlotSpec(
            csv=Path(args.csv), out_dir=Path(args.out), metric=args.metric,
            band=args.band, image_format=args.image_format,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not spec.csv.exists():
        print(f"error: no such file: {spec.csv}", file=sys.stderr)
        return 1
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    try:
        curves = render_curves(spec)
        tradeoffs = render_tradeoff(spec)
    except SchemaMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {len(curves)} curve image(s) and {len(tradeoffs)} trade-off panel(s) "
          f"to {spec.out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
