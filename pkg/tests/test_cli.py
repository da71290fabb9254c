import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from hamsim.cli import run

DEMO_SPECS = Path(__file__).resolve().parents[1] / "demos" / "specs"


def _run(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestExitCodes:
    def test_simulate_passes(self, tmp_path, capsys):
        code, out, _ = _run(capsys, "simulate", "--spec", str(DEMO_SPECS / "trotter_pec.ini"),
                            "--shots", "20000", "--out", str(tmp_path))
        assert code == 0
        assert "[PASS]" in out
        assert (tmp_path / "simulate.csv").exists()
        timing = json.loads((tmp_path / "timing.json").read_text())
        assert timing["command"] == "simulate"

    def test_validation_failure_exits_one(self, tmp_path, capsys):
        # the small-eps branch ratio of the sample-count model is a recorded required failure
        code, out, _ = _run(capsys, "validate", "--suites", "cost-optimizer", "--out", str(tmp_path))
        assert code == 1
        assert "[FAIL]" in out

    def test_missing_spec(self, tmp_path, capsys):
        code, _, err = _run(capsys, "simulate", "--out", str(tmp_path))
        assert code == 2
        assert "--spec" in err

    def test_bad_spec_field(self, tmp_path, capsys):
        spec = tmp_path / "bad.ini"
        spec.write_text("[experiment]\nscenario = pauli2\nt = 1\nalgorithm = trotter\ncolour = red\n")
        code, _, err = _run(capsys, "simulate", "--spec", str(spec), "--out", str(tmp_path))
        assert code == 2
        assert "colour" in err and "line 5" in err

    def test_missing_file(self, tmp_path, capsys):
        code, _, _ = _run(capsys, "cost", "--spec", str(tmp_path / "nope.ini"), "--out", str(tmp_path))
        assert code == 2

    @pytest.mark.parametrize("suites", ["", "bogus"])
    def test_unknown_suite(self, tmp_path, capsys, suites):
        code, _, err = _run(capsys, "validate", "--suites", suites, "--out", str(tmp_path))
        assert code == 2
        assert "pec-exact" in err

    def test_bad_workers(self, tmp_path, capsys):
        code, _, _ = _run(capsys, "validate", "--workers", "0", "--out", str(tmp_path))
        assert code == 2

    def test_bad_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run(["simulate", "--colour", "red"])
        assert exc.value.code == 2

    def test_bad_format(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run(["cost", "--format", "xlsx"])
        assert exc.value.code == 2


class TestOutputs:
    def test_cost_writes_json_and_sweep(self, tmp_path, capsys):
        code, _, _ = _run(capsys, "cost", "--spec", str(DEMO_SPECS / "cost_trotter.ini"), "--out", str(tmp_path),
                          "--format", "plotdata")
        assert code == 0
        data = json.loads((tmp_path / "cost.json").read_text())
        assert data["records"][0]["epsilon_b"] == pytest.approx(0.06, rel=1e-9)
        assert (tmp_path / "cost_sweep.csv").read_text().count("\n") == 10
        assert (tmp_path / "cost_sweep.dat").read_text().startswith("#")

    def test_sweep_csv_rows(self, tmp_path, capsys):
        code, _, _ = _run(capsys, "sweep", "--spec", str(DEMO_SPECS / "sweep_depth.ini"), "--out", str(tmp_path))
        assert code == 0
        assert (tmp_path / "sweep.csv").read_text().count("\n") == 65

    def test_seed_override_lands_in_provenance(self, tmp_path, capsys):
        _run(capsys, "simulate", "--spec", str(DEMO_SPECS / "rlcu_noisy.ini"), "--seed", "11", "--shots", "5000",
             "--out", str(tmp_path), "--format", "json")
        data = json.loads((tmp_path / "simulate.json").read_text())
        assert data["provenance"]["seed"] == 11
        assert "wall" not in json.dumps(data)

    def test_same_seed_same_bytes(self, tmp_path, capsys):
        args = ["simulate", "--spec", str(DEMO_SPECS / "trotter_pec.ini"), "--shots", "5000", "--format", "json"]
        _run(capsys, *args, "--out", str(tmp_path / "a"), "--workers", "1")
        _run(capsys, *args, "--out", str(tmp_path / "b"), "--workers", "3")
        assert (tmp_path / "a" / "simulate.json").read_bytes() == (tmp_path / "b" / "simulate.json").read_bytes()


@pytest.mark.skipif(shutil.which("hamsim") is None, reason="console script not installed")
def test_console_script(tmp_path):
    proc = subprocess.run(["hamsim", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("hamsim ")
    proc = subprocess.run([sys.executable, "-m", "hamsim.cli", "simulate"], capture_output=True, text=True,
                          cwd=tmp_path)
    assert proc.returncode == 2
