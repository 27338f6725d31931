"""
Integration tests for the command-line front end
Each test runs main() end to end into a temporary output directory
"""

import json

import pytest

from config import settings
from main import main
from models.responses import RunStatus, RunSummary
from services.experiments import ExperimentRunner
from services.persistence import read_csv
from utils.errors import ResummationDivergesError


@pytest.fixture
def out(temp_workspace, monkeypatch):
    monkeypatch.setattr(settings, "WORKSPACE_DIR", str(temp_workspace))
    monkeypatch.setattr(settings, "OUTPUT_DIR", str(temp_workspace / "output"))
    return temp_workspace / "output"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def summary_of(stdout: str) -> dict:
    return json.loads(stdout.strip().splitlines()[-1])


def error_of(stderr: str) -> dict:
    records = [json.loads(line) for line in stderr.splitlines() if line.startswith("{")]
    return [r for r in records if "error" in r][-1]


class TestCommands:
    """One run per command on the four-point causet"""

    def test_verdict_for_ideal_measurement(self, out, capsys):
        code, stdout, _ = run(capsys, "verdict", "--out", str(out), "--set", "kraus=ideal:uniform:w=1", "--set", "shift=0.5")
        assert code == 0
        summary = summary_of(stdout)
        assert summary["details"]["verdict"] == "ACAUSAL"
        assert (out / "verdict" / "config.txt").exists()
        rows = read_csv(out / "verdict" / "verdict_table.csv")
        assert {r["kraus"]: r["verdict"] for r in rows}["kick:square"] == "ACAUSAL"

    def test_linear_kick_scan_is_flat(self, out, capsys):
        code, stdout, _ = run(capsys, "chi-scan", "--out", str(out), "--set", "kraus=kick:linear")
        assert code == 0
        assert summary_of(stdout)["details"]["max_gap"] < 1e-12
        rows = read_csv(out / "chi-scan" / "chi_scan.csv")
        assert len(rows) == 13
        assert list(rows[0]) == ["s", "chi_re", "chi_im", "gap"]

    def test_square_kick_scan_with_oracle(self, out, capsys):
        code, stdout, _ = run(
            capsys, "chi-scan", "--out", str(out), "--oracle", "fock",
            "--set", "kraus=kick:square", "--set", "s_grid=0:2:5",
        )
        assert code == 0
        details = summary_of(stdout)["details"]
        assert details["max_gap"] > 1e-2
        assert details["max_difference"] < 1e-4

    def test_propagator_outputs(self, out, capsys):
        code, stdout, _ = run(capsys, "propagator", "--out", str(out))
        assert code == 0
        details = summary_of(stdout)["details"]
        assert details["rank"] == 4
        assert details["n_modes"] == 2
        assert (out / "propagator" / "w_imag.txt").exists()

    def test_scenario_bundle(self, out, capsys):
        code, stdout, _ = run(capsys, "scenario", "--out", str(out))
        assert code == 0
        assert summary_of(stdout)["status"] == "ok"
        assert (out / "scenario" / "vectors.csv").exists()

    def test_rt_for_uniform_bins(self, out, capsys):
        code, stdout, _ = run(capsys, "rt", "--out", str(out), "--set", "resolution=uniform:w=1", "--set", "rt_t=0.5")
        assert code == 0
        details = summary_of(stdout)["details"]
        assert details["ratio"] == pytest.approx(0.5)
        changes = [float(r["change"]) for r in read_csv(out / "rt" / "continuity.csv")]
        assert changes == sorted(changes, reverse=True)

    def test_sample_passes(self, out, capsys):
        code, stdout, _ = run(capsys, "sample", "--out", str(out), "--seed", "7", "--set", "replications=20", "--set", "epsilon=0.1")
        assert code == 0
        assert summary_of(stdout)["details"]["pass_rate"] >= 0.9


class TestReproducibility:
    def test_reruns_are_byte_identical(self, out, capsys):
        args = ["--out", str(out), "--seed", "3", "--set", "replications=5", "--set", "epsilon=0.2"]
        run(capsys, "sample", *args)
        first = (out / "sample" / "replications.csv").read_bytes()
        run(capsys, "sample", *args)
        assert (out / "sample" / "replications.csv").read_bytes() == first

    def test_resolved_config_reloads(self, out, capsys):
        run(capsys, "chi-scan", "--out", str(out), "--set", "kraus=kick:square")
        first = (out / "chi-scan" / "chi_scan.csv").read_bytes()
        config = out / "chi-scan" / "config.txt"
        code, _, _ = run(capsys, "chi-scan", "--config", str(config))
        assert code == 0
        assert (out / "chi-scan" / "chi_scan.csv").read_bytes() == first


class TestErrors:
    """Failures exit 2 with one JSON record on stderr"""

    def test_malformed_literal(self, out, capsys):
        code, stdout, stderr = run(capsys, "verdict", "--out", str(out), "--set", "kraus=kick:cubic")
        assert code == 2
        assert stdout == ""
        record = error_of(stderr)
        assert record["error"] == "InvalidConfigError"
        assert record["command"] == "verdict"

    def test_unknown_key(self, out, capsys):
        code, _, stderr = run(capsys, "verdict", "--out", str(out), "--set", "kruas=kick:square")
        assert code == 2
        assert error_of(stderr)["error"] == "ValidationError"

    def test_set_without_equals(self, out, capsys):
        code, _, stderr = run(capsys, "verdict", "--out", str(out), "--set", "kraus")
        assert code == 2
        assert error_of(stderr)["error"] == "LiteralParseError"

    def test_deco_on_sprinkled_causet(self, out, capsys):
        code, _, stderr = run(capsys, "deco", "--out", str(out), "--set", "spacetime=sprinkle")
        assert code == 2
        assert "four-point" in error_of(stderr)["message"]


class TestExitCodes:
    def test_failed_check_exits_one(self, out, capsys, mocker):
        failed = RunSummary(command="sample", run_id="run_x", status=RunStatus.CHECK_FAILED, details={"pass_rate": 0.5})
        mocker.patch.object(ExperimentRunner, "cmd_sample", return_value=failed)
        code, stdout, _ = run(capsys, "sample", "--out", str(out))
        assert code == 1
        summary = summary_of(stdout)
        assert summary["status"] == "check_failed"
        assert summary["outputs"][0].endswith("config.txt")

    def test_numerical_error_exits_two(self, out, capsys, mocker):
        mocker.patch.object(
            ExperimentRunner, "cmd_propagator",
            side_effect=ResummationDivergesError(spectral_radius=1.5, condition=1e12),
        )
        code, stdout, stderr = run(capsys, "propagator", "--out", str(out))
        assert code == 2
        assert stdout == ""
        record = error_of(stderr)
        assert record["error"] == "ResummationDivergesError"
        assert record["spectral_radius"] == 1.5
