import json

import pytest

from ambigufair.cli import main
from conftest import FIXTURES

SYNTH = [
    "--dataset", "synthetic", "--synth-n", "300", "--synth-rho", "0.6",
    "--synth-bias", "0.6", "--B", "4", "--reps", "2", "--model", "lr",
    "--thresholds", "0,0.2,0.4", "--min-train", "10",
]


def test_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0


def test_missing_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


class TestPrepare:
    def test_german_fixture_round_trip(self, tmp_path):
        code = main([
            "prepare", "--raw", str(FIXTURES / "german_sample.data"),
            "--dataset", "german", "--out", str(tmp_path),
        ])
        assert code == 0
        assert (tmp_path / "german.csv").exists()
        assert (tmp_path / "german.schema.json").exists()
        header = (tmp_path / "german.csv").read_text().splitlines()[0]
        assert header.endswith("__s__,__y__")

    def test_unknown_dataset_is_usage_error(self, tmp_path, capsys):
        code = main(["prepare", "--raw", str(tmp_path), "--dataset", "mystery"])
        assert code == 2

    def test_missing_file_is_runtime_error(self, tmp_path, capsys):
        missing = tmp_path / "nope.data"
        code = main(["prepare", "--raw", str(missing), "--dataset", "german"])
        assert code == 1
        assert str(missing) in capsys.readouterr().err

    def test_env_var_sets_data_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("AMBIGUFAIR_DATA_DIR", str(tmp_path))
        code = main([
            "prepare", "--raw", str(FIXTURES / "german_sample.data"),
            "--dataset", "german",
        ])
        assert code == 0
        assert (tmp_path / "german.csv").exists()


class TestRun:
    def test_synthetic_run_writes_deterministic_results(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["run", *SYNTH, "--seed", "7", "--out", str(out1)]) == 0
        assert main(["run", *SYNTH, "--seed", "7", "--out", str(out2), "--jobs", "2"]) == 0
        assert (out1 / "results.csv").read_bytes() == (out2 / "results.csv").read_bytes()

    def test_default_methods_cover_all_arms(self, tmp_path):
        out = tmp_path / "r"
        assert main(["run", *SYNTH, "--out", str(out)]) == 0
        body = (out / "results.csv").read_text()
        for method in ("ours", "unconstrained", "rw", "pp"):
            assert f",{method}," in body

    def test_out_of_range_threshold_is_usage_error(self, tmp_path, capsys):
        code = main(["run", "--dataset", "synthetic", "--thresholds", "0,0.6",
                     "--out", str(tmp_path)])
        assert code == 2
        assert "0.5" in capsys.readouterr().err  # message names the bound

    def test_missing_prepared_data_is_runtime_error(self, tmp_path, capsys):
        code = main(["run", "--dataset", "german", "--data-dir", str(tmp_path),
                     "--out", str(tmp_path / "o")])
        assert code == 1
        assert "prepare" in capsys.readouterr().err

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "dataset": "synthetic", "synth_n": 300, "synth_rho": 0.6,
            "synth_bias": 0.6, "B": 4, "reps": 2, "model": "lr",
            "thresholds": [0, 0.2], "min_train": 10, "methods": ["unconstrained"],
        }))
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg), "--reps", "1", "--out", str(out)]) == 0
        body = (out / "results.csv").read_text().splitlines()
        assert len(body) == 2  # header + one record: the flag overrode reps=2

    def test_unknown_config_key_is_usage_error(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"dataset": "synthetic", "turbo": True}))
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2

    def test_results_json_embeds_config(self, tmp_path):
        out = tmp_path / "r"
        assert main(["run", *SYNTH, "--out", str(out)]) == 0
        doc = json.loads((out / "results.json").read_text())
        assert doc["config"]["dataset"] == "synthetic"
        assert doc["config"]["reps"] == 2
        assert "versions" in doc


class TestDiagnose:
    def test_model_all_covers_every_kind(self, tmp_path):
        out = tmp_path / "d"
        code = main([
            "diagnose", "--dataset", "synthetic", "--synth-n", "200",
            "--B", "2", "--reps", "1", "--model", "all", "--out", str(out),
        ])
        assert code == 0
        lines = (out / "diagnostics.csv").read_text().splitlines()
        assert [row.split(",")[1] for row in lines[1:]] == ["lr", "svm", "gbdt"]

    def test_writes_diagnostics_csv(self, tmp_path):
        out = tmp_path / "d"
        code = main([
            "diagnose", "--dataset", "synthetic", "--synth-n", "300",
            "--B", "4", "--reps", "1", "--model", "lr", "--out", str(out),
        ])
        assert code == 0
        lines = (out / "diagnostics.csv").read_text().splitlines()
        assert lines[0].startswith("dataset,model,reps")
        row = lines[1].split(",")
        assert row[1] == "lr"
        assert float(row[4]) == 0.0  # single repetition: std is zero
