import csv
import io
import json

import pytest

from lattice_surgery.codes import code_A, code_B
from lattice_surgery.experiment import (
    AncillaPolicy,
    ConfigError,
    ExperimentConfig,
    basis_checks,
    bell_fidelity,
    emit,
    parse_inputs,
    run,
    shot_rng,
    wald_se,
)
from lattice_surgery.noise import NoiseModel
from lattice_surgery.pauli import format_pauli
from lattice_surgery.tableau import ImpossibleOutcomeError

NOISY = NoiseModel(p1=0.001, p2=0.01, p_meas=0.003)


def three_sigma(value, se, target):
    return abs(value - target) <= 3 * se


class TestPolicies:
    @pytest.mark.parametrize("text", ["keep_all", "force:000", "postselect:00-", "postselect:--0"])
    def test_round_trip(self, text):
        assert str(AncillaPolicy.parse(text)) == text

    @pytest.mark.parametrize("text", ["force:", "force:0a", "sometimes:01", "keep_all:0"])
    def test_malformed(self, text):
        with pytest.raises(ConfigError):
            AncillaPolicy.parse(text)

    def test_accepts(self):
        p = AncillaPolicy.parse("postselect:0-1")
        assert p.accepts((0, 1, 1)) and p.accepts((0, 0, 1))
        assert not p.accepts((1, 0, 1))
        assert AncillaPolicy.parse("force:01").accepts((1, 1))

    def test_forced_bits(self):
        assert AncillaPolicy.parse("force:0-1").forced(3) == [0, None, 1]
        assert AncillaPolicy.parse("postselect:01").forced(2) == [None, None]


class TestConfig:
    @pytest.mark.parametrize(
        "value, expected",
        [("00", ("0", "0")), ("+-", ("+", "-")), ("+i0", ("+i", "0")), (["1", "-i"], ("1", "-i")), ("0 +", ("0", "+"))],
    )
    def test_parse_inputs(self, value, expected):
        assert parse_inputs(value) == expected

    def test_defaults(self):
        cfg = ExperimentConfig(protocol="bell_smooth")
        assert cfg.inputs == ("+", "+")
        assert cfg.ancilla_policy.kind == "keep_all"

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"protocol": "swap"},
            {"protocol": "bell_rough", "inputs": "0"},
            {"protocol": "bell_rough", "inputs": "0z"},
            {"protocol": "bell_rough", "ancilla_policy": "force:00"},
            {"shots": 0},
            {"seed": -1},
            {"seed": 2**64},
            {"detection_policy": "all"},
            {"joint_correction": "maybe"},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            ExperimentConfig(**kwargs)

    def test_from_dict_rejects_unknown_keys(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"protocol": "bell_rough", "colour": "blue"})

    def test_dict_round_trip(self):
        cfg = ExperimentConfig(protocol="cnot", inputs="1+", noise=NOISY, shots=7, seed=3, ancilla_policy="postselect:0-0--")
        assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


class TestEstimators:
    def test_ideal_phi_plus(self):
        assert bell_fidelity({"ZZ": 1, "XX": 1, "YY": -1}, "phi+")[0] == 1.0

    def test_orthogonal_bell_states(self):
        e = {"ZZ": 1, "XX": -1, "YY": 1}
        assert bell_fidelity(e, "phi-")[0] == 1.0
        assert bell_fidelity(e, "phi+")[0] == 0.0
        assert bell_fidelity(e, "psi+")[0] == 0.0

    def test_psi_plus(self):
        assert bell_fidelity({"ZZ": -1, "XX": 1, "YY": 1}, "psi+")[0] == 1.0

    @pytest.mark.parametrize("target", ["phi+", "phi-", "psi+", "psi-"])
    def test_maximally_mixed(self, target):
        assert bell_fidelity({"ZZ": 0, "XX": 0, "YY": 0}, target)[0] == 0.25

    def test_error_propagation(self):
        _, se = bell_fidelity({"ZZ": 0.9, "XX": 0.8, "YY": -0.7}, "phi+", {"ZZ": 0.03, "XX": 0.04, "YY": 0.12})
        assert se == pytest.approx(0.25 * 0.13)

    def test_unknown_target(self):
        with pytest.raises(ValueError):
            bell_fidelity({"ZZ": 0, "XX": 0, "YY": 0}, "ghz")

    def test_wald(self):
        assert wald_se(1.0, 100) == 0.0
        assert wald_se(0.0, 100) == pytest.approx(0.1)

    @pytest.mark.parametrize(
        "basis, code, expected",
        [
            ("Z", code_A(), ["-Z1Z2", "-Z3Z4"]),
            ("X", code_B(), ["+X5X6X7X8"]),
            ("Y", code_A(), ["-Z3Z4"]),
        ],
    )
    def test_basis_checks(self, basis, code, expected):
        assert [format_pauli(g) for g in basis_checks(basis, code)] == expected

    def test_basis_checks_bad_basis(self):
        with pytest.raises(ValueError):
            basis_checks("W", code_A())

    def test_shot_streams(self):
        a = [shot_rng(7, "Z", i).random() for i in range(3)]
        assert a == [shot_rng(7, "Z", i).random() for i in range(3)]
        assert len(set(a)) == 3
        assert shot_rng(7, "X", 0).random() != a[0]


class TestNoiselessRuns:
    def test_forced_rough_is_exact(self):
        res = run(ExperimentConfig(protocol="bell_rough", inputs="00", shots=50, ancilla_policy="force:000"))
        assert res.fidelity_raw == res.fidelity_postselected == 1.0
        for name in ("S1_A", "S2_A", "S3_A", "S1_B", "S2_B", "S3_B"):
            assert res.stabilizer(name) == 1.0
        assert res.logical("ZZ") == res.logical("XX") == 1.0
        assert res.logical("YY") == -1.0

    @pytest.mark.parametrize("policy, state", [("force:000", "phi+"), ("force:011", "phi-"), ("force:101", "phi-"), ("force:110", "phi+")])
    def test_rough_branch_targets(self, policy, state):
        res = run(ExperimentConfig(protocol="bell_rough", shots=20, ancilla_policy=policy))
        assert res["target"]["bell_state"] == state
        assert res.fidelity_raw == 1.0

    @pytest.mark.parametrize("policy, state", [("force:00", "phi+"), ("force:10", "psi+")])
    def test_smooth_branch_targets(self, policy, state):
        res = run(ExperimentConfig(protocol="bell_smooth", inputs="++", shots=20, ancilla_policy=policy))
        assert res["target"]["bell_state"] == state
        assert res.fidelity_raw == 1.0

    def test_forced_impossible_raises(self):
        with pytest.raises(ImpossibleOutcomeError):
            run(ExperimentConfig(protocol="bell_smooth", shots=2, ancilla_policy="force:01"))

    def test_keep_all_corrects_every_branch(self):
        res = run(ExperimentConfig(protocol="bell_rough", inputs="11", shots=200, seed=4))
        counts = res["branch_counts"]["m1"]
        assert counts["0"] > 0 and counts["1"] > 0
        assert res.fidelity_raw == 1.0

    def test_joint_correction_off_mixes_branches(self):
        res = run(ExperimentConfig(protocol="bell_rough", shots=400, seed=4, joint_correction="off"))
        assert res.logical("ZZ") == 1.0
        assert three_sigma(res.logical("XX"), 0.05, 0.0)

    @pytest.mark.parametrize("protocol, inputs", [("teleport", "1"), ("teleport", "-i"), ("hadamard", "+i"), ("cnot", "+0"), ("cnot", "1-")])
    def test_gate_protocols(self, protocol, inputs):
        res = run(ExperimentConfig(protocol=protocol, inputs=inputs, shots=60, seed=1))
        assert res.fidelity_raw == 1.0

    def test_estimator_consistency(self):
        # teleported |+>: <X> = 1, <Z> and <Y> are unbiased coin flips
        res = run(ExperimentConfig(protocol="teleport", inputs="+", shots=2000, seed=9))
        assert res.logical("X") == 1.0
        for name in ("Z", "Y"):
            q = res["logicals"][name]["raw"]
            assert three_sigma(q["value"], max(q["se"], 1e-9), 0.0)
        assert all(v["value"] == 1.0 for v in res["stabilizers"].values())

    def test_mixed_setting_added_when_needed(self):
        res = run(ExperimentConfig(protocol="cnot", inputs="0+", shots=10))
        assert "ZX" in res["settings"]

    @pytest.mark.parametrize(
        "protocol, policy, rate",
        [("bell_rough", "postselect:00-", 0.25), ("bell_smooth", "postselect:0-", 0.5), ("bell_rough", "postselect:--0", 0.5)],
    )
    def test_survival(self, protocol, policy, rate):
        n = 2000
        res = run(ExperimentConfig(protocol=protocol, shots=n, seed=3, ancilla_policy=policy))
        sp = res["survival"]["mean"]["ancilla"]
        assert abs(sp - rate) <= 3 * (rate * (1 - rate) / (3 * n)) ** 0.5
        assert res.fidelity_raw == 1.0
        for counts in res["settings"].values():
            assert counts["kept_detection"] <= counts["kept_ancilla"] <= counts["total"]


class TestNoisyRuns:
    def test_bell_formula_matches_group_estimator(self):
        res = run(ExperimentConfig(protocol="bell_rough", shots=800, seed=6, noise=NOISY))
        for which in ("raw", "postselected"):
            e = {k: res["logicals"][k][which]["value"] for k in ("ZZ", "XX", "YY")}
            f, _ = bell_fidelity(e, res["target"]["bell_state"])
            assert f == pytest.approx(res["fidelity"][which]["value"], abs=1e-12)

    def test_forced_impossible_is_discarded(self):
        res = run(ExperimentConfig(protocol="bell_smooth", shots=200, seed=1, noise=NOISY, ancilla_policy="force:01"))
        assert res["survival"]["mean"]["ancilla"] < 0.2

    def test_detection_none(self):
        res = run(ExperimentConfig(protocol="bell_rough", shots=300, seed=6, noise=NOISY, detection_policy="none"))
        assert res.fidelity_raw == res.fidelity_postselected

    def test_noisy_encoding(self):
        res = run(ExperimentConfig(protocol="teleport", inputs="0", shots=300, seed=2, noise=NOISY, noisy_encoding=True))
        assert 0.5 < res.fidelity_raw <= 1.0


class TestOutput:
    def test_deterministic_json(self):
        cfg = ExperimentConfig(protocol="bell_rough", shots=200, seed=42, noise=NOISY)
        assert run(cfg).to_json() == run(cfg).to_json()

    def test_seed_matters(self):
        a = run(ExperimentConfig(protocol="bell_rough", shots=200, seed=1, noise=NOISY)).to_json()
        b = run(ExperimentConfig(protocol="bell_rough", shots=200, seed=2, noise=NOISY)).to_json()
        assert a != b

    def test_document_echo(self):
        res = run(ExperimentConfig(protocol="bell_rough", shots=5, seed=17))
        doc = json.loads(res.to_json())
        assert doc["seed"] == 17
        assert doc["config"]["protocol"] == "bell_rough"
        assert doc["version"]

    @pytest.mark.parametrize("protocol", ["bell_rough", "teleport", "cnot"])
    def test_csv_row_count(self, protocol):
        res = run(ExperimentConfig(protocol=protocol, shots=5))
        rows = list(csv.reader(io.StringIO(res.to_csv())))
        n_outputs = len(res["target"]["outputs"])
        assert rows[0] == ["name", "value", "se", "kept", "total"]
        assert len(rows) - 1 == 3 * n_outputs + 3 + 2

    def test_emit(self, tmp_path):
        res = run(ExperimentConfig(protocol="bell_rough", shots=5, record_shots=True))
        emit(res, tmp_path / "r.json", tmp_path / "r.csv", tmp_path / "r.jsonl")
        assert json.loads((tmp_path / "r.json").read_text())["fidelity"]["raw"]["value"] == 1.0
        assert (tmp_path / "r.csv").read_text().startswith("name,")
        records = [json.loads(line) for line in (tmp_path / "r.jsonl").read_text().splitlines()]
        assert len(records) == 15
        assert {"setting", "shot", "branch", "records"} <= set(records[0])

    def test_emit_reports_path(self, tmp_path):
        res = run(ExperimentConfig(protocol="bell_rough", shots=2))
        with pytest.raises(OSError, match="missing"):
            emit(res, tmp_path / "missing" / "r.json")
