import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from lattice_surgery.codes import LOGICAL_LABELS, code_A, code_B, encode, label_operator, merged_rough, merged_smooth, syndromes
from lattice_surgery.noise import Executor
from lattice_surgery.pauli import format_pauli, multiply, parse
from lattice_surgery.reference import DenseState
from lattice_surgery.surgery import (
    PROTOCOLS,
    JointMeasurement,
    PauliFrame,
    SurgeryError,
    correction_for,
    correction_tables,
    ideal_output,
    merge,
    protocol,
    readout_letters,
    rough_joint,
    run_protocol,
    smooth_joint,
    zx_joint,
)
from lattice_surgery.tableau import ImpossibleOutcomeError, StabilizerTableau
from lattice_surgery.verification import derive_correction_tables, rough_branch_suite, smooth_branch_suite

A, B = code_A(), code_B()


def names(ops):
    return [format_pauli(p) for p in ops]


def encoded(la: str, lb: str) -> StabilizerTableau:
    t = StabilizerTableau(8)
    encode(t, A, la)
    encode(t, B, lb)
    return t


class TestJointMeasurements:
    def test_rough(self):
        jm = rough_joint(A, B)
        assert names(jm.merging) == ["+X3X5", "+X4X6"]
        assert names(jm.split_ops) == ["-Z3Z4"]
        assert jm.letters == ("X", "X")
        assert jm.sign == 1
        assert [jm.m1(b) for b in itertools.product((0, 1), repeat=2)] == [0, 1, 1, 0]

    def test_smooth(self):
        jm = smooth_joint(A, B)
        assert names(jm.merging) == ["+Z2Z4Z5Z7"]
        assert names(jm.split_ops) == ["+X1X2X3X4"]
        assert jm.letters == ("Z", "Z")

    def test_zx(self):
        jm = zx_joint(A, B)
        assert names(jm.merging) == ["+Z2X5", "+Z4X6"]
        assert jm.letters == ("Z", "X")

    def test_split_corrections_anticommute_only_with_their_split(self):
        for jm in (rough_joint(A, B), smooth_joint(A, B), zx_joint(A, B)):
            for s, c in zip(jm.split_ops, jm.split_corrections):
                if c is None:
                    continue
                assert not c.commutes(s)
                assert all(c.commutes(m) for m in jm.merging)

    def test_rejects_anticommuting_merging(self):
        with pytest.raises(SurgeryError):
            JointMeasurement.build("bad", "rough", A, B, A.logical_x, B.logical_x, [parse("X3X5", 8), parse("Z3Z4", 8)])

    def test_rejects_wrong_product(self):
        with pytest.raises(SurgeryError):
            JointMeasurement.build("bad", "rough", A, B, A.logical_x, B.logical_x, [parse("X3X5", 8)])

    def test_rejects_empty(self):
        with pytest.raises(SurgeryError):
            JointMeasurement.build("bad", "rough", A, B, A.logical_x, B.logical_x, [])


class TestMergeProjectsOntoMergedCode:
    @pytest.mark.parametrize("bits", list(itertools.product((0, 1), repeat=2)))
    def test_rough(self, bits):
        t = encoded("0", "0")
        merge(t, rough_joint(A, B), Executor(), bits)
        assert syndromes(t, merged_rough(bits)) == [1] * 7

    @pytest.mark.parametrize("bit", [0, 1])
    def test_smooth(self, bit):
        t = encoded("+", "+")
        merge(t, smooth_joint(A, B), Executor(), (bit,))
        assert syndromes(t, merged_smooth((bit,))) == [1] * 7

    def test_smooth_merge_is_random_on_plus_states(self):
        t = encoded("+", "+")
        assert not t.is_deterministic(parse("+Z2Z4Z5Z7", 8))


class TestFrame:
    def test_flips(self):
        f = PauliFrame(8)
        f.add(A.logical_x)
        assert f.flips(A.logical_z) == 1
        assert f.flips(B.logical_z) == 0
        assert f.flips_qubit(0, "Z") == 1
        assert f.flips_qubit(0, "X") == 0
        assert f.logical_exponents(A) == (1, 0)

    def test_apply_to(self):
        t = encoded("0", "0")
        f = PauliFrame(8)
        f.add(A.logical_x)
        f.apply_to(t)
        assert t.expectation(-A.logical_z) == 1

    def test_composition(self):
        f, g = PauliFrame(8), PauliFrame(8)
        f.add(A.logical_x)
        g.add(A.logical_x)
        assert (f * g) == PauliFrame(8)


class TestReadoutLetters:
    def test_bases(self):
        assert "".join(readout_letters(A, "Z").values()) == "ZZZZ"
        assert "".join(readout_letters(A, "X").values()) == "XXXX"
        assert "".join(readout_letters(A, "Y").values()) == "YXZZ"


class TestProtocols:
    def test_known(self):
        assert set(PROTOCOLS) == {"bell_rough", "bell_smooth", "teleport", "hadamard", "cnot"}
        with pytest.raises(SurgeryError):
            protocol("swap")

    def test_layouts(self):
        assert PROTOCOLS["bell_rough"].ancilla_layout() == ["merge1", "merge2", "split1"]
        assert PROTOCOLS["bell_smooth"].ancilla_layout() == ["merge1", "split1"]
        assert PROTOCOLS["cnot"].n_data == 12
        assert PROTOCOLS["cnot"].branch_names == ("m1_ZZ", "m1_XX", "c")

    def test_wrong_forced_length(self):
        with pytest.raises(SurgeryError):
            run_protocol(PROTOCOLS["bell_rough"], encoded("0", "0"), Executor(), (0, 0))

    def test_impossible_forced_split(self):
        # the smooth split operator commutes with the merging operator, so its outcome is fixed
        with pytest.raises(ImpossibleOutcomeError):
            run_protocol(PROTOCOLS["bell_smooth"], encoded("+", "+"), Executor(), (0, 1))


class TestCorrectionTables:
    def test_committed_tables_match_regeneration(self):
        assert correction_tables() == derive_correction_tables()

    def test_teleport_is_x_power_m2_z_power_m1(self):
        table = correction_tables()["teleport"]["table"]
        assert table == {"00": "I", "01": "X", "10": "Z", "11": "Y"}

    def test_bell_tables(self):
        assert correction_tables()["bell_rough"]["table"] == {"0": "II", "1": "ZI"}
        assert correction_tables()["bell_smooth"]["table"] == {"0": "II", "1": "XI"}

    def test_cnot_table_covers_all_branches(self):
        table = correction_tables()["cnot"]["table"]
        assert sorted(table) == ["".join(b) for b in itertools.product("01", repeat=3)]

    def test_correction_for(self):
        assert correction_for(PROTOCOLS["cnot"], (0, 1, 0)) == {"C": "Z", "T": "I"}


class TestBranchSuites:
    def test_rough(self):
        r = rough_branch_suite()
        assert r.ok and r.checks == 8, r.summary()

    def test_smooth(self):
        r = smooth_branch_suite()
        assert r.ok and r.checks == 2, r.summary()


class TestIdealOutput:
    @pytest.mark.parametrize("label", sorted(LOGICAL_LABELS))
    def test_teleport_is_identity(self, label):
        (g,) = ideal_output(PROTOCOLS["teleport"], (label,), (0, 0), True)
        letter, sign = LOGICAL_LABELS[label]
        assert g.label() == letter and g.sign == sign

    @pytest.mark.parametrize("label, expected", [("0", "+X"), ("1", "-X"), ("+", "+Z"), ("-", "-Z"), ("+i", "-Y")])
    def test_hadamard(self, label, expected):
        (g,) = ideal_output(PROTOCOLS["hadamard"], (label,), (0, 0), True)
        assert ("+" if g.sign > 0 else "-") + g.label() == expected

    def test_cnot_makes_bell_pair(self):
        gens = ideal_output(PROTOCOLS["cnot"], ("+", "0"), (0, 0, 0), True)
        assert DenseState.from_stabilizers(gens).expectation(parse("+X1X2")) == pytest.approx(1)
        assert DenseState.from_stabilizers(gens).expectation(parse("+Z1Z2")) == pytest.approx(1)

    def test_uncorrected_rough_bell(self):
        gens = ideal_output(PROTOCOLS["bell_rough"], ("0", "0"), (1,), False)
        assert DenseState.from_stabilizers(gens).expectation(parse("-X1X2")) == pytest.approx(1)


class TestRandomRuns:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.sampled_from(sorted(LOGICAL_LABELS)))
    def test_teleported_state_arrives(self, seed, label):
        spec = PROTOCOLS["teleport"]
        t = StabilizerTableau(8)
        encode(t, A, label)
        encode(t, B, "0")
        out = run_protocol(spec, t, Executor(random.Random(seed)))
        out.frame.apply_to(t)
        assert t.expectation(label_operator(B, label)) == 1
        assert syndromes(t, B) == [1, 1, 1]

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.sampled_from(["0", "1", "+", "-"]), st.sampled_from(["0", "1", "+", "-"]))
    def test_cnot_on_product_inputs(self, seed, lc, lt):
        spec = PROTOCOLS["cnot"]
        codes = spec.codes
        t = StabilizerTableau(12)
        encode(t, codes["C"], lc)
        encode(t, codes["M"], "+")
        encode(t, codes["T"], lt)
        out = run_protocol(spec, t, Executor(random.Random(seed)))
        out.frame.apply_to(t)
        ideal = DenseState(2)
        for q, label in enumerate((lc, lt)):
            for g in {"0": (), "1": ("X",), "+": ("H",), "-": ("X", "H")}[label]:
                ideal.apply_gate(g, q)
        ideal.apply_gate("CNOT", 0, 1)
        for lx, lz in itertools.product("IXYZ", repeat=2):
            if lx == lz == "I":
                continue
            op = parse("+I", 12)
            for role, letter in (("C", lx), ("T", lz)):
                if letter != "I":
                    op = multiply(op, codes[role].logical(letter))
            want = ideal.expectation(parse(f"{lx}1{lz}2".replace("I1", "").replace("I2", "") or "I", 2))
            assert t.expectation(op) == pytest.approx(want, abs=1e-9)
