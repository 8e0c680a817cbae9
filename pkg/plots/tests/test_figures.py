"""Rendering: emitted files, table fidelity, comparison preconditions."""

import json
import shutil

import pytest

from asfm_plots import (
    COMPARE_FILES,
    RUN_FILES,
    SchemaMismatch,
    compare_runs,
    plot_run,
    summary_table,
)


class TestPlotRun:
    def test_emits_three_figures_and_a_table(self, baseline_run, tmp_path):
        written = plot_run(baseline_run.run_dir, tmp_path / "out")
        assert [p.name for p in written] == list(RUN_FILES)
        for path in written:
            assert path.exists() and path.stat().st_size > 0
        assert sum(1 for p in written if p.suffix == ".png") == 3

    def test_table_values_equal_the_recorded_summary(self, baseline_run, tmp_path):
        plot_run(baseline_run.run_dir, tmp_path / "out")
        table = (tmp_path / "out" / "summary.txt").read_text()
        summary = json.loads((baseline_run.run_dir / "summary.json").read_text())
        values = {}
        for line in table.splitlines()[1:]:
            label, value = line.rsplit(None, 1)
            values[label.strip()] = value
        assert int(values["order number (ON)"]) == summary["order_number"]
        assert float(values["order execution rate (OER)"]) == summary["order_execution_rate"]
        assert float(values["turnover rate (TR)"]) == summary["turnover_rate"]
        assert float(values["volatility (VO)"]) == summary["volatility"]

    def test_table_file_is_byte_identical_across_invocations(
        self, baseline_run, tmp_path
    ):
        plot_run(baseline_run.run_dir, tmp_path / "one")
        plot_run(baseline_run.run_dir, tmp_path / "two")
        assert (tmp_path / "one" / "summary.txt").read_bytes() == (
            tmp_path / "two" / "summary.txt"
        ).read_bytes()

    def test_run_directory_is_not_touched(self, baseline_run, tmp_path):
        before = {
            path.name: path.read_bytes()
            for path in baseline_run.run_dir.iterdir()
            if path.is_file()
        }
        plot_run(baseline_run.run_dir, tmp_path / "out")
        after = {
            path.name: path.read_bytes()
            for path in baseline_run.run_dir.iterdir()
            if path.is_file()
        }
        assert after == before


class TestCompareRuns:
    def test_overlays_two_runs(self, baseline_run, other_run, tmp_path):
        written = compare_runs(
            [baseline_run.run_dir, other_run.run_dir], out_dir=tmp_path / "cmp"
        )
        assert [p.name for p in written] == list(COMPARE_FILES)
        for path in written:
            assert path.exists() and path.stat().st_size > 0

    def test_single_run_is_rejected(self, baseline_run, tmp_path):
        with pytest.raises(ValueError, match="at least two"):
            compare_runs([baseline_run.run_dir], out_dir=tmp_path)

    def test_label_count_must_match(self, baseline_run, other_run, tmp_path):
        with pytest.raises(ValueError, match="one label per run"):
            compare_runs(
                [baseline_run.run_dir, other_run.run_dir],
                labels=["just one"],
                out_dir=tmp_path,
            )

    def test_mismatched_agents_are_rejected(self, baseline_run, other_run, tmp_path):
        doctored = tmp_path / "doctored"
        shutil.copytree(other_run.run_dir, doctored)
        path = doctored / "metrics.csv"
        header, rest = path.read_text().split("\n", 1)
        path.write_text(header.replace("agent9,agent10", "agent10,agent9") + "\n" + rest)
        with pytest.raises(SchemaMismatch, match="lists agents"):
            compare_runs([baseline_run.run_dir, doctored], out_dir=tmp_path / "cmp")

    def test_identical_runs_overlay_coincides(self, baseline_run, tmp_path):
        twin = tmp_path / "twin"
        shutil.copytree(baseline_run.run_dir, twin)
        written = compare_runs(
            [baseline_run.run_dir, twin],
            labels=["a", "b"],
            out_dir=tmp_path / "cmp",
        )
        assert all(path.exists() for path in written)


class TestSummaryTable:
    def test_handles_runs_with_no_orders(self, baseline_run, tmp_path):
        quiet = tmp_path / "quiet"
        shutil.copytree(baseline_run.run_dir, quiet)
        summary = json.loads((quiet / "summary.json").read_text())
        summary["order_execution_rate"] = None
        (quiet / "summary.json").write_text(json.dumps(summary))
        from asfm_plots import load_run

        table = summary_table(load_run(quiet))
        assert "order execution rate (OER)" in table
        assert "n/a" in table
