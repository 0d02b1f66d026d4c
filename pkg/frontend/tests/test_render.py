import numpy as np
import pytest

from ambigufair_plots.data import (
    CSV_COLUMNS,
    SchemaMismatch,
    baseline_stats,
    curve_stats,
    load_results_csv,
)
from ambigufair_plots.render import PlotSpec, main, render_curves, render_tradeoff

HEADER = ",".join(CSV_COLUMNS)


def write_results(path, datasets=("demo",), models=("lr",), reps=3,
                  thresholds=(0.0, 0.1, 0.2), methods=("ours", "unconstrained", "rw", "pp"),
                  flag_one=False, seed=0):
    rng = np.random.default_rng(seed)
    lines = [HEADER]
    for dataset in datasets:
        for model in models:
            for method in methods:
                cells = thresholds if method == "ours" else (None,)
                for u in cells:
                    for rep in range(reps):
                        flags = ""
                        dp = round(float(rng.random()), 6)
                        eop = round(float(rng.random()), 6)
                        if flag_one and method == "ours" and rep == 0 and u == 0.0:
                            flags, dp, eop = "dp|eop", "", ""
                        acc = round(float(0.6 + 0.4 * rng.random()), 6)
                        lines.append(
                            f"{dataset},{model},{method},"
                            f"{'' if u is None else u},{rep},{1000 + rep},{acc},{dp},{eop},"
                            f"100,0.1,0.8,{flags}"
                        )
    path.write_text("\n".join(lines) + "\n")
    return path


class TestLoading:
    def test_schema_mismatch_names_offender(self, tmp_path):
        bad = tmp_path / "r.csv"
        bad.write_text(HEADER.replace("nbe_accuracy", "nbe_acc") + "\n")
        with pytest.raises(SchemaMismatch, match="nbe_acc"):
            load_results_csv(bad)

    def test_loads_header_only(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text(HEADER + "\n")
        assert load_results_csv(path).empty


class TestAggregation:
    def test_curve_means_equal_csv_aggregates_exactly(self, tmp_path):
        path = write_results(tmp_path / "r.csv", reps=5)
        frame = load_results_csv(path)
        curve = curve_stats(frame, "dp")
        raw = frame[(frame["method"] == "ours")]
        for _, row in curve.iterrows():
            values = raw[raw["threshold"] == row["threshold"]]["dp"].to_numpy(dtype=float)
            assert row["mean"] == values.mean()
            assert row["std"] == np.std(values)
            assert row["n"] == len(values)

    def test_flagged_rows_excluded(self, tmp_path):
        path = write_results(tmp_path / "r.csv", reps=3, flag_one=True)
        frame = load_results_csv(path)
        curve = curve_stats(frame, "dp")
        at_zero = curve[curve["threshold"] == 0.0].iloc[0]
        assert at_zero["n"] == 2  # one of three repetitions was flagged
        assert np.isfinite(at_zero["mean"])

    def test_baseline_stats_cover_present_methods(self, tmp_path):
        path = write_results(tmp_path / "r.csv", methods=("ours", "unconstrained", "rw"))
        refs = baseline_stats(load_results_csv(path), "eop")
        assert set(refs) == {"unconstrained", "rw"}


class TestRenderCurves:
    def test_single_sweep_produces_three_images(self, tmp_path):
        path = write_results(tmp_path / "r.csv")
        out = tmp_path / "img"
        out.mkdir()
        spec = PlotSpec(csv=path, out_dir=out, image_format="png")
        curves = render_curves(spec)
        trade = render_tradeoff(spec)
        assert len(curves) == 2  # dp + eop
        assert len(trade) == 1
        for p in curves + trade:
            assert p.exists() and p.stat().st_size > 0

    def test_header_only_renders_nothing(self, tmp_path, capsys):
        path = tmp_path / "r.csv"
        path.write_text(HEADER + "\n")
        out = tmp_path / "img"
        out.mkdir()
        spec = PlotSpec(csv=path, out_dir=out)
        assert render_curves(spec) == []
        assert "warning" in capsys.readouterr().err

    def test_rerun_is_byte_identical(self, tmp_path):
        path = write_results(tmp_path / "r.csv")
        for fmt in ("png", "svg"):
            out_a, out_b = tmp_path / f"a_{fmt}", tmp_path / f"b_{fmt}"
            out_a.mkdir(), out_b.mkdir()
            a = render_curves(PlotSpec(csv=path, out_dir=out_a, image_format=fmt))
            b = render_curves(PlotSpec(csv=path, out_dir=out_b, image_format=fmt))
            for pa, pb in zip(a, b):
                assert pa.read_bytes() == pb.read_bytes()

    def test_rendering_does_not_mutate_csv(self, tmp_path):
        path = write_results(tmp_path / "r.csv")
        before = path.read_bytes()
        out = tmp_path / "img"
        out.mkdir()
        render_curves(PlotSpec(csv=path, out_dir=out))
        assert path.read_bytes() == before


class TestRenderTradeoff:
    def test_nine_panels_for_three_by_three(self, tmp_path):
        path = write_results(
            tmp_path / "r.csv", datasets=("german", "adult", "compas"),
            models=("lr", "svm", "gbdt"), reps=2,
        )
        out = tmp_path / "img"
        out.mkdir()
        panels = render_tradeoff(PlotSpec(csv=path, out_dir=out))
        assert len(panels) == 9

    def test_missing_pp_rows_warns_but_renders(self, tmp_path, capsys):
        path = write_results(tmp_path / "r.csv", methods=("ours", "unconstrained", "rw"))
        out = tmp_path / "img"
        out.mkdir()
        panels = render_tradeoff(PlotSpec(csv=path, out_dir=out))
        assert len(panels) == 1
        assert "pp" in capsys.readouterr().err


class TestCli:
    def test_end_to_end(self, tmp_path):
        path = write_results(tmp_path / "r.csv")
        out = tmp_path / "img"
        assert main(["--csv", str(path), "--out", str(out), "--band", "1.0"]) == 0
        assert len(list(out.glob("*.png"))) == 3

    def test_metric_filter(self, tmp_path):
        path = write_results(tmp_path / "r.csv")
        out = tmp_path / "img"
        assert main(["--csv", str(path), "--out", str(out), "--metric", "eop",
                     "--format", "svg"]) == 0
        names = sorted(p.name for p in out.glob("*.svg"))
        assert names == ["demo_lr_eop.svg", "demo_lr_tradeoff.svg"]

    def test_missing_file_fails(self, tmp_path, capsys):
        assert main(["--csv", str(tmp_path / "no.csv"), "--out", str(tmp_path)]) == 1

    def test_schema_mismatch_fails_nonzero(self, tmp_path, capsys):
        bad = tmp_path / "r.csv"
        bad.write_text("a,b\n1,2\n")
        assert main(["--csv", str(bad), "--out", str(tmp_path / "img")]) == 1
        assert "offending" in capsys.readouterr().err

    def test_negative_band_is_usage_error(self, tmp_path):
        path = write_results(tmp_path / "r.csv")
        assert main(["--csv", str(path), "--out", str(tmp_path), "--band", "-1"]) == 2
