"""The asfm command line: simulate, metrics, replay-verify, export-scenario."""

import json

import pytest

from asfm.cli import main


def _simulate(tmp_path, *extra):
    out = tmp_path / "run"
    argv = [
        "simulate",
        "--scenario",
        "baseline",
        "--days",
        "2",
        "--out",
        str(out),
        *extra,
    ]
    assert main(argv) == 0
    return out


class TestSimulate:
    def test_writes_a_run_and_prints_the_headline(self, tmp_path, capsys):
        out = _simulate(tmp_path)
        stdout = capsys.readouterr().out
        assert f"wrote {out}" in stdout
        assert "order_number" in stdout
        assert "agent returns" in stdout
        assert (out / "manifest.json").exists()

    def test_scenario_file_round_trip(self, tmp_path, capsys):
        spec_path = tmp_path / "custom.json"
        assert main(["export-scenario", "rate_cut", "--out", str(spec_path)]) == 0
        out = tmp_path / "run"
        assert (
            main(
                [
                    "simulate",
                    "--scenario",
                    str(spec_path),
                    "--days",
                    "1",
                    "--out",
                    str(out),
                ]
            )
            == 0
        )
        config = json.loads((out / "config.json").read_text())
        assert config["scenario"]["name"] == "rate_cut"
        assert config["scenario"]["days"] == 1

    def test_seed_override_lands_in_run_id(self, tmp_path, capsys):
        _simulate(tmp_path, "--seed", "42")
        assert "baseline-seed42" in capsys.readouterr().out

    def test_replay_transport_needs_a_transcript(self, tmp_path):
        with pytest.raises(SystemExit):
            main(
                [
                    "simulate",
                    "--scenario",
                    "baseline",
                    "--transport",
                    "replay",
                    "--out",
                    str(tmp_path / "run"),
                ]
            )


class TestMetrics:
    def test_matches_the_simulation_summary(self, tmp_path, capsys):
        out = _simulate(tmp_path)
        summary = json.loads((out / "summary.json").read_text())
        capsys.readouterr()
        assert main(["metrics", "--run", str(out)]) == 0
        stdout = capsys.readouterr().out
        assert "whole run" in stdout
        for key in ("order_number", "turnover_rate", "volatility"):
            assert key in stdout
        # the recomputed order count equals the recorded one
        line = next(l for l in stdout.splitlines() if "order_number" in l)
        assert line.split()[-1] == str(summary["order_number"])

    def test_range_flag(self, tmp_path, capsys):
        out = _simulate(tmp_path)
        capsys.readouterr()
        assert main(["metrics", "--run", str(out), "--range", "2..2"]) == 0
        assert "days 2..2" in capsys.readouterr().out

    def test_bad_range_exits(self, tmp_path):
        out = _simulate(tmp_path)
        with pytest.raises(SystemExit):
            main(["metrics", "--run", str(out), "--range", "twoish"])

    def test_inverted_range_exits(self, tmp_path):
        out = _simulate(tmp_path)
        with pytest.raises(SystemExit, match="1 <= FIRST <= LAST"):
            main(["metrics", "--run", str(out), "--range", "9..2"])

    def test_missing_run_dir_is_a_clean_error(self, tmp_path, capsys):
        assert main(["metrics", "--run", str(tmp_path / "nowhere")]) == 2
        assert "asfm:" in capsys.readouterr().err


class TestReplayVerify:
    def test_ok_run_returns_zero(self, tmp_path, capsys):
        out = _simulate(tmp_path)
        capsys.readouterr()
        assert main(["replay-verify", "--run", str(out)]) == 0
        assert "Ok" in capsys.readouterr().out

    def test_tampered_run_returns_one(self, tmp_path, capsys):
        out = _simulate(tmp_path)
        config = out / "config.json"
        config.write_text(config.read_text().replace('"seed": 7', '"seed": 9'))
        capsys.readouterr()
        assert main(["replay-verify", "--run", str(out)]) == 1
        assert "config" in capsys.readouterr().out


class TestExportScenario:
    def test_prints_json_to_stdout(self, capsys):
        assert main(["export-scenario", "inflation(8.5)"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["name"] == "inflation(8.5)"
        assert payload["news_schedule"][0]["persist_days"] == 30

    def test_unknown_preset_is_a_clean_error(self, capsys):
        assert main(["export-scenario", "mystery"]) == 2
        err = capsys.readouterr().err
        assert "asfm:" in err and "mystery" in err
