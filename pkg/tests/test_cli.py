import csv
import json

import pytest

from tileprobe.cli import main
from tileprobe.workload import REPORT_COLUMNS


class TestGenData:
    def test_deterministic(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["gen-data", "--rows", "1000", "--cols", "5", "--seed", "7", "--out", str(a)]) == 0
        assert main(["gen-data", "--rows", "1000", "--cols", "5", "--seed", "7", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_missing_out_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["gen-data", "--rows", "10"])
        assert exc.value.code == 2

    def test_zero_rows(self, tmp_path):
        out = tmp_path / "z.csv"
        assert main(["gen-data", "--rows", "0", "--cols", "4", "--out", str(out)]) == 0
        assert out.read_text().count("\n") == 1


@pytest.fixture(scope="module")
def cli_dataset(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "d.csv"
    main(["gen-data", "--rows", "4000", "--cols", "4", "--seed", "3", "--dist", "gaussian", "--out", str(path)])
    return path


class TestReplayCommand:
    def test_exact_with_verify(self, cli_dataset, tmp_path, capsys):
        report = tmp_path / "rep"
        code = main([
            "replay", "--file", str(cli_dataset), "--tracked", "2",
            "--mode", "exact", "--queries", "8", "--target", "300",
            "--grid", "8", "--min-split-count", "16",
            "--report", str(report), "--verify",
        ])
        assert code == 0
        assert "all errors within reported bounds" in capsys.readouterr().out
        with open(report.with_suffix(".csv")) as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 8
        assert all(r["actual_error"] == "0.0" for r in rows)
        summary = json.loads(report.with_suffix(".json").read_text())
        assert summary["mode"] == "exact" and summary["queries"] == 8

    def test_approx_with_verify(self, cli_dataset, tmp_path):
        report = tmp_path / "rep"
        code = main([
            "replay", "--file", str(cli_dataset), "--tracked", "2",
            "--mode", "approx", "--phi", "0.05", "--queries", "8", "--target", "300",
            "--grid", "8", "--min-split-count", "16",
            "--report", str(report), "--verify",
        ])
        assert code == 0
        with open(report.with_suffix(".csv")) as f:
            rows = list(csv.DictReader(f))
        assert all(float(r["reported_bound"]) <= 0.05 for r in rows)

    def test_negative_phi_is_usage_error(self, cli_dataset):
        with pytest.raises(SystemExit) as exc:
            main(["replay", "--file", str(cli_dataset), "--mode", "approx",
                  "--phi", "-1", "--report", "/tmp/x"])
        assert exc.value.code == 2

    def test_approx_requires_phi(self, cli_dataset):
        with pytest.raises(SystemExit):
            main(["replay", "--file", str(cli_dataset), "--mode", "approx", "--report", "/tmp/x"])


class TestPlot:
    def test_gnuplot_columns(self, cli_dataset, tmp_path):
        r1, r2 = tmp_path / "e", tmp_path / "a"
        main(["replay", "--file", str(cli_dataset), "--tracked", "2", "--mode", "exact",
              "--queries", "5", "--target", "300", "--grid", "8", "--report", str(r1), "--no-oracle"])
        main(["replay", "--file", str(cli_dataset), "--tracked", "2", "--mode", "approx", "--phi", "0.05",
              "--queries", "5", "--target", "300", "--grid", "8", "--report", str(r2), "--no-oracle"])
        out = tmp_path / "cols.dat"
        assert main(["plot", "--reports", str(r1.with_suffix(".csv")), str(r2.with_suffix(".csv")),
                     "--out", str(out)]) == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0].startswith("# query_idx")
        assert len(lines) == 1 + 5
        assert all(len(line.split()) == 5 for line in lines[1:])


def test_report_columns_documented_order():
    assert REPORT_COLUMNS == [
        "query_idx", "mode", "phi", "elapsed_us", "rows_read", "tiles_split",
        "agg", "value", "ci_lo", "ci_hi", "reported_bound", "oracle", "actual_error",
    ]
