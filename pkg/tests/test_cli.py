import json
import subprocess
import sys

import pytest

from lattice_surgery.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestBell:
    def test_rough_forced_to_stdout(self, capsys):
        code, out, _ = run_cli(capsys, "bell", "--boundary", "rough", "--input", "00", "--shots", "50", "--seed", "7",
                               "--ancilla-policy", "force:000")
        assert code == EXIT_OK
        doc = json.loads(out)
        assert doc["fidelity"]["raw"]["value"] == 1.0
        assert doc["seed"] == 7

    def test_smooth_survival(self, capsys):
        code, out, _ = run_cli(capsys, "bell", "--boundary", "smooth", "--input", "++", "--shots", "400",
                               "--ancilla-policy", "postselect:0-")
        assert code == EXIT_OK
        assert json.loads(out)["survival"]["mean"]["ancilla"] == pytest.approx(0.5, abs=0.08)

    def test_rough_input_11_records_branch(self, capsys):
        code, out, _ = run_cli(capsys, "bell", "--boundary", "rough", "--input", "11", "--shots", "40")
        doc = json.loads(out)
        assert doc["target"]["bell_state"] == "phi+"
        assert sum(doc["branch_counts"]["m1"].values()) == 120

    def test_files(self, capsys, tmp_path):
        out_json, out_csv = tmp_path / "r.json", tmp_path / "r.csv"
        code, out, _ = run_cli(capsys, "bell", "--shots", "10", "--out", str(out_json), "--csv", str(out_csv))
        assert code == EXIT_OK and out == ""
        assert json.loads(out_json.read_text())["config"]["shots"] == 10
        assert out_csv.read_text().count("\n") == 12

    def test_flags_override_config(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"protocol": "bell_smooth", "shots": 5, "seed": 3, "noise": {"p2": 0.5}}))
        code, out, _ = run_cli(capsys, "bell", "--config", str(cfg), "--seed", "9", "--p2", "0")
        doc = json.loads(out)
        assert doc["config"]["protocol"] == "bell_smooth"
        assert doc["config"]["shots"] == 5
        assert doc["seed"] == 9
        assert doc["config"]["noise"]["p2"] == 0.0

    def test_noise_flags(self, capsys):
        code, out, _ = run_cli(capsys, "bell", "--shots", "100", "--p2", "0.05", "--p-meas", "0.01")
        doc = json.loads(out)
        assert doc["config"]["noise"]["p_meas"] == 0.01
        assert doc["fidelity"]["raw"]["value"] < 1.0


class TestTeleport:
    @pytest.mark.parametrize("label", ["0", "+", "1"])
    def test_noiseless(self, capsys, label):
        code, out, _ = run_cli(capsys, "teleport", "--input", label, "--shots", "30")
        assert code == EXIT_OK
        assert json.loads(out)["fidelity"]["raw"]["value"] == 1.0

    def test_noisy_input_1(self, capsys):
        code, out, _ = run_cli(capsys, "teleport", "--input", "1", "--shots", "500", "--p2", "0.01", "--seed", "4")
        f = json.loads(out)["fidelity"]
        assert f["raw"]["value"] < 1.0
        assert f["postselected"]["value"] >= f["raw"]["value"] - 3 * f["raw"]["se"]


class TestRun:
    def test_cnot(self, capsys):
        code, out, _ = run_cli(capsys, "run", "--protocol", "cnot", "--input", "+0", "--shots", "20")
        assert code == EXIT_OK
        assert json.loads(out)["fidelity"]["raw"]["value"] == 1.0


class TestCodeInfo:
    def test_rep3(self, capsys):
        code, out, _ = run_cli(capsys, "code-info", "--code", "rep3")
        assert code == EXIT_OK
        assert json.loads(out)["distance"] == {"x": 3, "z": 1}

    def test_sc2x2a(self, capsys):
        _, out, _ = run_cli(capsys, "code-info", "--code", "sc2x2A")
        assert json.loads(out)["generators"] == ["-Z1Z2", "-Z3Z4", "+X1X2X3X4"]

    def test_sc3x3(self, capsys):
        _, out, _ = run_cli(capsys, "code-info", "--code", "sc3x3")
        doc = json.loads(out)
        assert len(doc["generators"]) == 8
        assert doc["distance"] == {"x": 3, "z": 3}

    def test_unknown(self, capsys):
        code, _, err = run_cli(capsys, "code-info", "--code", "toric7")
        assert code == EXIT_CONFIG
        assert "unknown code" in err


class TestErrors:
    def test_bad_input(self, capsys):
        code, _, err = run_cli(capsys, "bell", "--input", "0x")
        assert code == EXIT_CONFIG and "error" in err

    def test_impossible_force(self, capsys):
        code, _, err = run_cli(capsys, "bell", "--boundary", "smooth", "--ancilla-policy", "force:01", "--shots", "2")
        assert code == EXIT_CONFIG and "impossible" in err

    def test_missing_config(self, capsys, tmp_path):
        code, _, _ = run_cli(capsys, "bell", "--config", str(tmp_path / "nope.json"))
        assert code == EXIT_IO

    def test_malformed_config(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("{not json")
        code, _, _ = run_cli(capsys, "bell", "--config", str(cfg))
        assert code == EXIT_CONFIG

    def test_unwritable_output(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "bell", "--shots", "2", "--out", str(tmp_path / "no" / "r.json"))
        assert code == EXIT_IO and "no" in err

    def test_teleport_rejects_other_protocol(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"protocol": "cnot"}))
        code, _, _ = run_cli(capsys, "teleport", "--config", str(cfg))
        assert code == EXIT_CONFIG

    def test_argparse_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["bell", "--boundary", "diagonal"])
        assert exc.value.code == 2


class TestVerify:
    def test_branches(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--suite", "branches")
        assert code == EXIT_OK
        assert "PASS branches:rough" in out
        assert "FAIL" not in out


def test_module_entry_point_is_deterministic(tmp_path):
    argv = [sys.executable, "-m", "lattice_surgery", "bell", "--shots", "30", "--seed", "5", "--p2", "0.02"]
    first = subprocess.run(argv, capture_output=True, check=True).stdout
    second = subprocess.run(argv, capture_output=True, check=True).stdout
    assert first == second
    assert json.loads(first)["seed"] == 5
