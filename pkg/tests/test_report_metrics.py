import json
import numpy as np
import pandas as pd
import pytest

from utils.config import parse_run_config
from utils.errors import ConfigError, InvalidArgumentError
from generateData.dataset import Dataset
from trainNetworks.model import model_from_layers
from runFederation.main import run
from reportMetrics.main import (
    confusion_matrix,
    top1_accuracy,
    per_class_accuracy,
    write_confusion_csv,
    write_runlog,
    read_runlog,
    read_summary_csv,
    summary_rows,
    build_report,
)
from f2l import run_cli

def _identity_model(class_count):
    return model_from_layers([(10 * np.eye(class_count), np.zeros(class_count))])

def _write_config(tmp_path, payload, name="tiny.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)

class TestConfusionMatrix:
    def test_perfect_model(self):
        labels = np.array([0, 1, 2, 2, 1])
        ds = Dataset(np.eye(3)[labels], labels, 3)
        matrix = confusion_matrix(_identity_model(3), ds)
        np.testing.assert_array_equal(matrix, np.diag([1, 2, 2]))
        assert top1_accuracy(matrix) == 1.0

    def test_trace_and_totals(self, blob_dataset, small_models):
        for model in small_models:
            matrix = confusion_matrix(model, blob_dataset)
            assert matrix.sum() == blob_dataset.size
            np.testing.assert_array_equal(matrix.sum(axis=1), blob_dataset.class_counts())
            assert top1_accuracy(matrix) == pytest.approx(np.trace(matrix) / blob_dataset.size, abs=1e-15)

    def test_empty_dataset(self, small_models):
        with pytest.raises(InvalidArgumentError):
            confusion_matrix(small_models[0], Dataset(np.empty((0, 4)), np.array([], dtype=int), 3))

    def test_per_class_accuracy(self):
        matrix = np.array([[3, 1, 0], [0, 0, 0], [2, 0, 2]])
        accuracy = per_class_accuracy(matrix)
        assert accuracy[0] == 0.75
        assert np.isnan(accuracy[1])
        assert accuracy[2] == 0.5

    def test_row_weighted_class_accuracy_is_top1(self, blob_dataset, small_models):
        for model in small_models:
            matrix = confusion_matrix(model, blob_dataset)
            weighted = np.average(per_class_accuracy(matrix), weights=matrix.sum(axis=1))
            assert weighted == pytest.approx(top1_accuracy(matrix), abs=1e-12)

    def test_diagonal_matrix(self):
        np.testing.assert_array_equal(per_class_accuracy(np.diag([4, 1, 7])), np.ones(3))

    def test_constant_predictor(self, blob_dataset):
        constant = model_from_layers([(np.zeros((4, 3)), np.array([1.0, 0.0, 0.0]))])
        matrix = confusion_matrix(constant, blob_dataset)
        np.testing.assert_array_equal(matrix[:, 0], blob_dataset.class_counts())
        assert not matrix[:, 1:].any()
        np.testing.assert_array_equal(per_class_accuracy(matrix), [1.0, 0.0, 0.0])

    def test_confusion_csv(self, tmp_path):
        write_confusion_csv(np.array([[2, 1], [0, 3]]), tmp_path / "confusion.csv")
        table = pd.read_csv(tmp_path / "confusion.csv")
        assert list(table.columns) == ["true_class", "pred_0", "pred_1"]
        np.testing.assert_array_equal(table[["pred_0", "pred_1"]].to_numpy(), [[2, 1], [0, 3]])

class TestRunlogFiles:
    @pytest.fixture
    def finished_run(self, tiny_payload, tmp_path):
        tiny_payload["distill"]["epsilon"] = 0.0
        runlog = run(parse_run_config(tiny_payload))
        write_runlog(runlog, tmp_path)
        return runlog, tmp_path

    def test_runlog_round_trip(self, finished_run):
        runlog, run_dir = finished_run
        assert read_runlog(run_dir / "runlog.jsonl").records == runlog.records

    def test_summary_matches_runlog(self, finished_run):
        runlog, run_dir = finished_run
        rows = read_summary_csv(run_dir / "summary.csv")
        assert rows == summary_rows(runlog)
        assert [row["aggregator"] for row in rows] == ["LKD", "LKD"]

    def test_build_report(self, finished_run):
        runlog, run_dir = finished_run
        report = build_report(run_dir)

        assert report["rounds"] == 2
        assert report["lkd_steps"] == 2
        assert report["fedavg_steps"] == 0
        assert report["final_global_top1"] == runlog.records[-1].global_top1
        assert (run_dir / "accuracy_curve.html").exists()

        table = pd.read_csv(run_dir / "per_class_accuracy.csv")
        assert list(table.columns) == ["round", "class", "accuracy"]
        assert len(table) == 2 * 3

    def test_mismatched_summary(self, finished_run):
        _, run_dir = finished_run
        summary = pd.read_csv(run_dir / "summary.csv")
        summary.loc[0, "global_top1"] = 0.123
        summary.to_csv(run_dir / "summary.csv", index=False)
        with pytest.raises(InvalidArgumentError):
            build_report(run_dir)

    def test_missing_runlog(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            build_report(tmp_path)

class TestConfig:
    def test_unknown_key(self, tiny_payload):
        tiny_payload["client"]["momentum"] = 0.9
        with pytest.raises(ConfigError, match="client.momentum"):
            parse_run_config(tiny_payload)

    def test_out_of_range(self, tiny_payload):
        tiny_payload["partition"]["alpha"] = 0.0
        with pytest.raises(ConfigError, match="partition.alpha"):
            parse_run_config(tiny_payload)

    def test_episode_longer_than_run(self, tiny_payload):
        tiny_payload["rounds_per_episode"] = 3
        with pytest.raises(ConfigError):
            parse_run_config(tiny_payload)

    def test_seed_override(self, tiny_payload):
        assert parse_run_config(tiny_payload, seed_override=42).seed == 42

class TestCli:
    def test_verify_theory(self, tmp_path, capsys):
        status = run_cli(["verify-theory", "--trials", "1000", "--seed", "7", "--out", str(tmp_path)])
        assert status == 0
        assert "violations t1=0 t2=0" in capsys.readouterr().out.strip().splitlines()[-1]
        report = json.loads((tmp_path / "theory_report.json").read_text())
        assert report["violations_t1"] == 0 and report["violations_t2"] == 0

    def test_missing_field(self, tiny_payload, tmp_path, capsys):
        del tiny_payload["rounds_per_episode"]
        status = run_cli(["run", "--config", _write_config(tmp_path, tiny_payload), "--out", str(tmp_path / "out")])
        assert status == 2
        assert "rounds_per_episode" in capsys.readouterr().err

    def test_run_twice_same_summary(self, tiny_payload, tmp_path, capsys):
        config_path = _write_config(tmp_path, tiny_payload)
        lines = []
        for name in ("first", "second"):
            assert run_cli(["run", "--config", config_path, "--out", str(tmp_path / name)]) == 0
            lines.append(capsys.readouterr().out.strip().splitlines()[-1])
        assert lines[0] == lines[1]
        assert lines[0].startswith("run: 2 rounds")

    def test_run_then_report(self, tiny_payload, tmp_path, capsys):
        config_path = _write_config(tmp_path, tiny_payload)
        assert run_cli(["run", "--config", config_path, "--out", str(tmp_path)]) == 0
        assert run_cli(["report", "--out", str(tmp_path)]) == 0
        assert capsys.readouterr().out.strip().splitlines()[-1].startswith("report: 2 rounds")

    def test_unknown_subcommand(self):
        assert run_cli(["train-everything"]) == 2

    def test_missing_config_file(self, tmp_path, capsys):
        status = run_cli(["run", "--config", str(tmp_path / "absent.json"), "--out", str(tmp_path)])
        assert status == 3
        assert capsys.readouterr().err.startswith("data error")

    def test_infeasible_partition(self, tiny_payload, tmp_path):
        tiny_payload["partition"].update({"regions": 40, "clients_per_region": 10})
        status = run_cli(["partition", "--config", _write_config(tmp_path, tiny_payload), "--out", str(tmp_path)])
        assert status == 3
