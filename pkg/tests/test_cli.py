import csv
import json

import pytest

from hassim.cli import main
from hassim.predictor import write_prediction_table


@pytest.fixture
def workspace(tmp_path):
    """Config file plus two short synthetic traces."""
    traces = {
        "steady": [5000] * 36,
        "choppy": [6000] * 9 + [300] * 9 + [6000] * 9 + [300] * 9,
    }
    for name, samples in traces.items():
        (tmp_path / f"{name}.txt").write_text("".join(f"{s}\n" for s in samples))
    config = tmp_path / "exp.yaml"
    config.write_text(
        """
session:
  duration_s: 36
  max_buffer_s: 20
network:
  latency_ms: 40
  backhaul_capacity_kbps: 50000
ladder:
  segment_length_s: 2
  bitrates_kbps: [100, 400, 1200, 3000, 6000]
clients:
  - trace: steady.txt
    category: static
    resolution: 1080p
  - trace: choppy.txt
    category: car
    resolution: 2160p
oracle:
  grid:
    switches_penalty_factor: [0, 2]
    stalls_penalty_factor: [1]
    buffer_threshold_1: [3]
    buffer_threshold_2: [6]
"""
    )
    return tmp_path, config


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestValidateConfig:
    def test_ok(self, workspace, capsys):
        _, config = workspace
        assert main(["validate-config", "--config", str(config)]) == 0
        assert "ok:" in capsys.readouterr().out

    def test_missing_trace_fails(self, tmp_path, capsys):
        config = tmp_path / "bad.yaml"
        config.write_text("clients:\n  - trace: nope.txt\n")
        assert main(["validate-config", "--config", str(config)]) == 1

    def test_bad_ladder_fails(self, tmp_path):
        config = tmp_path / "bad.yaml"
        config.write_text(
            "ladder:\n  bitrates_kbps: [500, 100]\nclients:\n  - trace: x.txt\n"
        )
        assert main(["validate-config", "--config", str(config)]) == 1


class TestRun:
    def test_cardinality_and_outputs(self, workspace, capsys):
        root, config = workspace
        out = root / "out"
        rc = main(
            [
                "run",
                "--config", str(config),
                "--algorithms", "ecas-static,tba",
                "--out", str(out),
                "--seed", "1",
            ]
        )
        assert rc == 0
        rows = read_rows(out / "metrics.csv")
        assert len(rows) == 4  # 2 algorithms x 2 clients
        assert {r["algorithm"] for r in rows} == {"ecas-static", "tba"}
        assert (out / "events_ecas-static.jsonl").exists()
        assert (out / "events_tba.jsonl").exists()
        assert (out / "buffer_tba.csv").exists()
        summary = read_rows(out / "summary.csv")
        assert [r["metric"] for r in summary][:2] == [
            "Mean bitrate (kbps)",
            "Mean switching magnitude (kbps)",
        ]

    def test_summary_equals_csv_aggregation(self, workspace):
        root, config = workspace
        out = root / "out_agg"
        main(["run", "--config", str(config), "--algorithms", "bba", "--out", str(out)])
        rows = [r for r in read_rows(out / "metrics.csv") if r["algorithm"] == "bba"]
        mean_bitrate = sum(float(r["mean_bitrate_kbps"]) for r in rows) / len(rows)
        summary = {r["metric"]: float(r["bba"]) for r in read_rows(out / "summary.csv")}
        assert summary["Mean bitrate (kbps)"] == pytest.approx(mean_bitrate)

    def test_deterministic_with_seed(self, workspace):
        root, config = workspace
        out_a, out_b = root / "a", root / "b"
        for out in (out_a, out_b):
            main(
                ["run", "--config", str(config), "--algorithms", "ecas-static",
                 "--out", str(out), "--seed", "3"]
            )
        assert (out_a / "metrics.csv").read_bytes() == (out_b / "metrics.csv").read_bytes()
        assert (out_a / "events_ecas-static.jsonl").read_bytes() == (
            out_b / "events_ecas-static.jsonl"
        ).read_bytes()

    def test_unknown_algorithm_rejected(self, workspace, capsys):
        _, config = workspace
        assert main(["run", "--config", str(config), "--algorithms", "mpc"]) == 2

    def test_table_algorithm_without_table_fails(self, workspace):
        _, config = workspace
        assert main(["run", "--config", str(config), "--algorithms", "ecas-table"]) == 2

    def test_absent_table_entry_fails_before_sessions(self, workspace, capsys):
        root, config = workspace
        table = root / "table.jsonl"
        write_prediction_table(table, [("steady", 5, (1, 1, 3, 6))])  # choppy missing
        out = root / "never"
        rc = main(
            ["run", "--config", str(config), "--algorithms", "ecas-table",
             "--table", str(table), "--out", str(out)]
        )
        assert rc == 2
        assert not (out / "metrics.csv").exists()

    def test_table_run_and_p1203_export(self, workspace):
        root, config = workspace
        table = root / "table.jsonl"
        write_prediction_table(
            table,
            [("steady", 5, (1, 1, 3, 6)), ("steady", 15, (0, 2, 2, 5)),
             ("choppy", 5, (2, 2, 3, 6)), ("choppy", 25, (1, 4, 2, 8))],
        )
        out = root / "table_out"
        rc = main(
            ["run", "--config", str(config), "--algorithms", "ecas-table",
             "--table", str(table), "--out", str(out), "--export-p1203"]
        )
        assert rc == 0
        bundle = json.loads((out / "p1203_ecas-table.json").read_text())
        assert set(bundle["clients"]) == {"c0", "c1"}


class TestOracleCommand:
    def test_labels_and_summary(self, workspace, capsys):
        root, config = workspace
        out = root / "oracle_out"
        rc = main(["oracle", "--config", str(config), "--out", str(out), "--seed", "2"])
        assert rc == 0
        lines = (out / "dataset.jsonl").read_text().strip().splitlines()
        header = json.loads(lines[0])
        assert header["samples"] == len(lines) - 1 == 2 * (36 - 4)
        assert (out / "label_summary.csv").exists()

    def test_resume_produces_identical_dataset(self, workspace):
        root, config = workspace
        full_out = root / "full"
        rc = main(["oracle", "--config", str(config), "--out", str(full_out), "--seed", "2"])
        assert rc == 0

        resumed_out = root / "resumed"
        resumed_out.mkdir()
        progress_lines = (full_out / "oracle_progress.jsonl").read_text().strip().splitlines()
        half = len(progress_lines) // 2
        (resumed_out / "oracle_progress.jsonl").write_text(
            "".join(line + "\n" for line in progress_lines[:half])
        )
        rc = main(["oracle", "--config", str(config), "--out", str(resumed_out), "--seed", "2"])
        assert rc == 0
        assert (resumed_out / "dataset.jsonl").read_bytes() == (full_out / "dataset.jsonl").read_bytes()


class TestMetricsCommand:
    def test_recompute_from_log(self, workspace):
        root, config = workspace
        out = root / "m_out"
        main(["run", "--config", str(config), "--algorithms", "tba", "--out", str(out)])
        re_out = root / "re_out"
        rc = main(
            ["metrics", str(out / "events_tba.jsonl"), "--out", str(re_out)]
        )
        assert rc == 0
        original = read_rows(out / "metrics.csv")
        recomputed = read_rows(re_out / "metrics.csv")
        for before, after in zip(original, recomputed):
            for key in ("mean_bitrate_kbps", "stall_count", "composite_qoe"):
                assert before[key] == after[key]

    def test_missing_log_errors(self, tmp_path):
        assert main(["metrics", str(tmp_path / "nope.jsonl"), "--out", str(tmp_path)]) == 2
