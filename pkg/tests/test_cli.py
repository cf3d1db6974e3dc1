"""Command-line behavior: exit codes, artifacts, reproducibility."""

import json

import numpy as np
import pytest

from logit_uncertainty import load_model, save_logit_records
from logit_uncertainty.cli import main

from conftest import TWO_CLASS_MEANS, make_correct_records


@pytest.fixture(scope="module")
def csv_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli-data")
    train = make_correct_records(150, TWO_CLASS_MEANS, seed=61)
    test = make_correct_records(40, TWO_CLASS_MEANS, seed=62)
    save_logit_records(train, d / "train.csv")
    save_logit_records(test, d / "test.csv")
    return d


@pytest.fixture(scope="module")
def fitted_model_path(csv_dir):
    out = csv_dir / "model.json"
    code = main(
        [
            "fit",
            "--train", str(csv_dir / "train.csv"),
            "--out", str(out),
            "--c-max", "2",
            "--min-samples-per-class", "50",
            "--seed", "9",
        ]
    )
    assert code == 0
    return out


class TestFit:
    def test_produces_model_with_fitted_classes(self, fitted_model_path):
        model = load_model(fitted_model_path)
        assert model.fitted_classes == [0, 1]

    def test_prints_effective_configuration(self, csv_dir, capsys):
        main(
            [
                "fit",
                "--train", str(csv_dir / "train.csv"),
                "--out", str(csv_dir / "m2.json"),
                "--c-max", "2",
                "--min-samples-per-class", "50",
            ]
        )
        out = capsys.readouterr().out
        assert "effective configuration" in out
        assert '"c_max": 2' in out

    def test_percentile_flags_are_normalized(self, csv_dir):
        a = csv_dir / "frac.json"
        b = csv_dir / "pct.json"
        base = [
            "fit",
            "--train", str(csv_dir / "train.csv"),
            "--c-max", "2",
            "--min-samples-per-class", "50",
        ]
        assert main(base + ["--out", str(a), "--q1", "0.8", "--q2", "0.6"]) == 0
        assert main(base + ["--out", str(b), "--q1", "80", "--q2", "60"]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_invalid_hyperparams_exit_1(self, csv_dir, capsys):
        code = main(
            [
                "fit",
                "--train", str(csv_dir / "train.csv"),
                "--out", str(csv_dir / "bad.json"),
                "--u1", "0.2",
                "--u2", "0.5",
            ]
        )
        assert code == 1
        assert "u2" in capsys.readouterr().err

    def test_missing_train_file_exit_2(self, csv_dir):
        code = main(
            [
                "fit",
                "--train", str(csv_dir / "nope.csv"),
                "--out", str(csv_dir / "x.json"),
            ]
        )
        assert code == 2

    def test_config_file_with_flag_override(self, csv_dir):
        cfg = csv_dir / "cfg.json"
        cfg.write_text(json.dumps({"q1": 80, "q2": 60, "c_max": 2, "seed": 9,
                                   "min_samples_per_class": 50}))
        out = csv_dir / "from-config.json"
        assert main(
            ["fit", "--train", str(csv_dir / "train.csv"),
             "--config", str(cfg), "--out", str(out)]
        ) == 0
        model = load_model(out)
        assert model.hyperparams.q1 == 0.8
        # flags beat the config file
        out2 = csv_dir / "override.json"
        assert main(
            ["fit", "--train", str(csv_dir / "train.csv"), "--config", str(cfg),
             "--out", str(out2), "--q1", "0.9"]
        ) == 0
        assert load_model(out2).hyperparams.q1 == 0.9

    def test_unknown_config_key_exit_1(self, csv_dir):
        cfg = csv_dir / "bad-cfg.json"
        cfg.write_text(json.dumps({"quantile_one": 0.8}))
        assert main(
            ["fit", "--train", str(csv_dir / "train.csv"),
             "--config", str(cfg), "--out", str(csv_dir / "y.json")]
        ) == 1


class TestEval:
    def test_report_row_per_data_row(self, csv_dir, fitted_model_path):
        out = csv_dir / "report.csv"
        code = main(
            ["eval", "--model", str(fitted_model_path),
             "--data", str(csv_dir / "test.csv"), "--out", str(out)]
        )
        assert code == 0
        lines = out.read_text().strip().split("\n")
        data_rows = (csv_dir / "test.csv").read_text().strip().split("\n")
        assert len(lines) - 1 == len(data_rows) - 1

    def test_corrupt_model_exit_2(self, csv_dir):
        bad = csv_dir / "corrupt.json"
        bad.write_text("{not json")
        assert main(
            ["eval", "--model", str(bad),
             "--data", str(csv_dir / "test.csv"), "--out", str(csv_dir / "r.csv")]
        ) == 2


class TestReproducibility:
    def test_fit_eval_pipeline_byte_identical(self, csv_dir):
        outputs = []
        for tag in ("one", "two"):
            model = csv_dir / f"repro-{tag}.json"
            report = csv_dir / f"repro-{tag}.csv"
            assert main(
                ["fit", "--train", str(csv_dir / "train.csv"), "--out", str(model),
                 "--c-max", "2", "--min-samples-per-class", "50", "--seed", "123"]
            ) == 0
            assert main(
                ["eval", "--model", str(model),
                 "--data", str(csv_dir / "test.csv"), "--out", str(report)]
            ) == 0
            outputs.append((model.read_bytes(), report.read_bytes()))
        assert outputs[0] == outputs[1]


class TestDrift:
    def test_writes_kl_row(self, csv_dir, fitted_model_path, capsys):
        out = csv_dir / "drift.csv"
        code = main(
            ["drift", "--model", str(fitted_model_path),
             "--reference", str(csv_dir / "test.csv"),
             "--stream", str(csv_dir / "test.csv"), "--out", str(out)]
        )
        assert code == 0
        header, row = out.read_text().strip().split("\n")
        assert header.split(",")[-1] == "kl"
        assert float(row.split(",")[-1]) == 0.0  # identical files
        assert "kl=" in capsys.readouterr().out


class TestDefer:
    def test_missing_thresholds_is_usage_error(self, csv_dir, fitted_model_path):
        report_a = csv_dir / "a.csv"
        assert main(
            ["eval", "--model", str(fitted_model_path),
             "--data", str(csv_dir / "test.csv"), "--out", str(report_a)]
        ) == 0
        code = main(
            ["defer", "--a-report", str(report_a), "--b-report", str(report_a),
             "--data", str(csv_dir / "test.csv")]
        )
        assert code == 1

    def test_full_defer_run(self, csv_dir, fitted_model_path):
        report = csv_dir / "a.csv"
        main(["eval", "--model", str(fitted_model_path),
              "--data", str(csv_dir / "test.csv"), "--out", str(report)])
        out = csv_dir / "bounds.csv"
        code = main(
            ["defer", "--a-report", str(report), "--b-report", str(report),
             "--data", str(csv_dir / "test.csv"),
             "--thresholds", "0.2,0.5,0.8", "--out", str(out)]
        )
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert len(lines) == 4
        # identical reports -> empty interval at every threshold
        assert all(line.endswith("true") for line in lines[1:])


class TestDiagnose:
    def test_writes_class_rows(self, csv_dir, fitted_model_path):
        out = csv_dir / "diag.csv"
        code = main(
            ["diagnose", "--model", str(fitted_model_path), "--alpha", "0.1",
             "--n-mc", "2000", "--seed", "4", "--out", str(out)]
        )
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0].startswith("class_index,alpha,f_alpha,r_alpha")
        assert len(lines) == 3


class TestSimulateNn:
    def test_writes_width_rows(self, csv_dir):
        out = csv_dir / "sim.csv"
        code = main(
            ["simulate-nn", "--widths", "4,8", "--depth", "2", "--components", "2",
             "--n", "300", "--seed", "3", "--out", str(out)]
        )
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "width,n_samples,ks_statistic"
        assert len(lines) == 3


class TestUsage:
    def test_unknown_subcommand_exit_1(self):
        assert main(["frobnicate"]) == 1

    def test_missing_required_flag_exit_1(self):
        assert main(["fit", "--train", "x.csv"]) == 1
