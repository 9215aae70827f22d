"""Cross-checks of the stabilizer engine against the dense oracle.

* :func:`derive_correction_tables` recomputes the branch corrections stored
  in ``corrections.json`` from dense logical-qubit simulations.
* :func:`oracle_suite` compares tableau and dense expectations after random
  Clifford circuits with interleaved measurements.
* The branch suites run each protocol with every ancilla/readout outcome
  forced and compare the corrected output with the ideal logical map.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .codes import LOGICAL_LABELS, StabilizerCode, encode, syndromes
from .noise import Executor
from .pauli import PauliString, format_pauli, multiply
from .reference import DenseState, all_expectations
from .surgery import (
    PROTOCOLS,
    ProtocolSpec,
    role_labels,
    run_protocol,
)
from .tableau import ImpossibleOutcomeError, StabilizerTableau

__all__ = [
    "SuiteResult",
    "random_circuit",
    "oracle_suite",
    "derive_correction_tables",
    "rough_branch_suite",
    "smooth_branch_suite",
    "channel_suite",
    "run_suites",
    "SUITES",
]

_LABEL_GATES = {"0": (), "1": ("X",), "+": ("H",), "-": ("X", "H"), "+i": ("H", "S"), "-i": ("X", "H", "S")}

# What each channel protocol should implement: ideal gate and input->output role map.
IDEAL_MAPS = {
    "teleport": ("I", {"A": "B"}),
    "hadamard": ("H", {"A": "B"}),
    "cnot": ("CNOT", {"C": "C", "T": "T"}),
}


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    failures: list[str] = field(default_factory=list)
    skipped: int = 0
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, message: str) -> None:
        self.failures.append(message)

    def summary(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        line = f"{status} {self.name}: {self.checks} checks, {len(self.failures)} failures"
        if self.skipped:
            line += f", {self.skipped} impossible branches skipped"
        line += f" ({self.seconds:.2f} s)"
        if self.failures:
            line += f"; first: {self.failures[0]}"
        return line


# ---------------------------------------------------------------------------
# random circuits


def random_circuit(rng: random.Random, n_qubits: int, depth: int) -> list[tuple]:
    """Random Clifford+measurement instruction list.

    Instructions are ("gate", name, targets) or ("measure", PauliString).
    """
    ops = []
    for _ in range(depth):
        r = rng.random()
        if r < 0.45 or n_qubits == 1 and r < 0.85:
            ops.append(("gate", rng.choice(["H", "S", "SDG", "X", "Y", "Z"]), (rng.randrange(n_qubits),)))
        elif r < 0.85:
            ops.append(("gate", rng.choice(["CNOT", "CZ"]), tuple(rng.sample(range(n_qubits), 2))))
        else:
            while True:
                p = PauliString(n_qubits, rng.getrandbits(n_qubits), rng.getrandbits(n_qubits), rng.choice((0, 2)))
                if not p.is_identity():
                    break
            ops.append(("measure", p))
    return ops


def oracle_suite(n_circuits: int = 1000, seed: int = 0, max_qubits: int = 6, depth: int = 40) -> SuiteResult:
    """Tableau vs dense expectations of all 4^n Paulis after random circuits.

    Random tableau outcomes are replayed into the dense state as forced bits.
    """
    result = SuiteResult("oracle")
    start = time.perf_counter()
    rng = random.Random(seed)
    for c in range(n_circuits):
        n = rng.randint(1, max_qubits)
        tab, dense = StabilizerTableau(n), DenseState(n)
        for instr in random_circuit(rng, n, depth):
            if instr[0] == "gate":
                tab.apply_gate(instr[1], *instr[2])
                dense.apply_gate(instr[1], *instr[2])
            else:
                bit = tab.measure(instr[1], rng).bit
                dense.measure_pauli(instr[1], forced=bit)
        try:
            tab.validate()
        except AssertionError as exc:
            result.fail(f"circuit {c}: invalid tableau ({exc})")
            continue
        table = all_expectations(dense)
        for x in range(1 << n):
            for z in range(1 << n):
                p = PauliString(n, x, z)
                result.checks += 1
                got = tab.expectation(p)
                if abs(got - table[x, z]) > 1e-9:
                    result.fail(f"circuit {c}: <{format_pauli(p)}> tableau {got}, dense {table[x, z]:.6f}")
    result.seconds = time.perf_counter() - start
    return result


# ---------------------------------------------------------------------------
# logical-level dense model and correction tables


def _prep(state: DenseState, qubit: int, label: str) -> None:
    for g in _LABEL_GATES[label]:
        state.apply_gate(g, qubit)


def _eigen_label(basis: str, bit: int) -> str:
    return {("Z", 0): "0", ("Z", 1): "1", ("X", 0): "+", ("X", 1): "-", ("Y", 0): "+i", ("Y", 1): "-i"}[(basis, bit)]


def _single(n: int, letters: dict) -> PauliString:
    return PauliString.from_sparse(n, {q: l for q, l in letters.items() if l != "I"})


def _project_branch(spec: ProtocolSpec, state: DenseState, index: dict, branch: Sequence[int]) -> None:
    n = state.n_qubits
    for step, bit in zip(spec.joints, branch):
        la, lb = step.jm.letters
        state.measure_pauli(_single(n, {index[step.role_a]: la, index[step.role_b]: lb}), forced=bit)
    for step, bit in zip(spec.readouts, branch[len(spec.joints) :]):
        state.measure_pauli(_single(n, {index[step.role]: step.basis}), forced=bit)


def _candidates(k: int):
    combos = itertools.product(range(4), repeat=k)
    for combo in sorted(combos, key=lambda c: (sum(1 for v in c if v), tuple(reversed(c)))):
        yield "".join("IXZY"[v] for v in combo)


def _derive_one(spec: ProtocolSpec) -> dict:
    roles = list(spec.roles)
    n_bits = len(spec.joints) + len(spec.readouts)
    if spec.name in IDEAL_MAPS:
        refs = {role: len(roles) + i for i, role in enumerate(spec.inputs)}
    else:
        refs = {}
    n = len(roles) + len(refs)
    index = {r: i for i, r in enumerate(roles)}

    def initial() -> DenseState:
        s = DenseState(n)
        if refs:
            for role, ref in refs.items():
                s.apply_gate("H", ref)
                s.apply_gate("CNOT", ref, index[role])
            for role, label in spec.fixed_inputs.items():
                _prep(s, index[role], label)
        else:
            for role, label in role_labels(spec, spec.default_inputs).items():
                _prep(s, index[role], label)
        return s

    def expected(branch) -> DenseState:
        if not refs:
            s = initial()
            _project_branch(spec, s, index, [0] * n_bits)
            return s
        gate, mapping = IDEAL_MAPS[spec.name]
        s = DenseState(n)
        for role, ref in refs.items():
            s.apply_gate("H", ref)
            s.apply_gate("CNOT", ref, index[mapping[role]])
        if gate == "H":
            s.apply_gate("H", index["B"])
        elif gate == "CNOT":
            s.apply_gate("CNOT", index["C"], index["T"])
        for step, bit in zip(spec.readouts, branch[len(spec.joints) :]):
            _prep(s, index[step.role], _eigen_label(step.basis, bit))
        return s

    table = {}
    out_idx = [index[r] for r in spec.outputs]
    for branch in itertools.product((0, 1), repeat=n_bits):
        s = initial()
        try:
            _project_branch(spec, s, index, branch)
        except ImpossibleOutcomeError:
            continue
        target = expected(branch)
        for letters in _candidates(len(out_idx)):
            trial = s.copy()
            op = _single(n, dict(zip(out_idx, letters)))
            if not op.is_identity():
                trial.apply_pauli(op)
            if trial.equals_up_to_phase(target):
                table["".join(map(str, branch))] = letters
                break
        else:
            raise RuntimeError(f"{spec.name}: no Pauli correction for branch {branch}")
    names = (
        ["m1"] if len(spec.joints) == 1 else [f"m1_{s.jm.name}" for s in spec.joints]
    ) + [r.name for r in spec.readouts]
    return {"bits": names, "outputs": list(spec.outputs), "table": table}


def derive_correction_tables() -> dict:
    """Branch -> logical correction letters for every protocol, from dense simulation."""
    return {name: _derive_one(spec) for name, spec in sorted(PROTOCOLS.items())}


# ---------------------------------------------------------------------------
# physical branch suites


def _dense_code_state(codes: Sequence[StabilizerCode], extra: Sequence[PauliString]) -> DenseState:
    gens = [g for c in codes for g in c.generators] + list(extra)
    return DenseState.from_stabilizers(gens)


def _bell_branch_suite(name: str, spec: ProtocolSpec, expected_ops: Callable[[int], list[PauliString]]) -> SuiteResult:
    """Force every ancilla pattern, compare tableau, dense replay, and target."""
    result = SuiteResult(name)
    start = time.perf_counter()
    a, b = spec.codes["A"], spec.codes["B"]
    labels = role_labels(spec, spec.default_inputs)
    init = [LOGICAL_LABELS[labels[r]] for r in ("A", "B")]
    prep_ops = []
    for code, (letter, sign) in zip((a, b), init):
        op = code.logical(letter)
        prep_ops.append(op if sign > 0 else -op)
    jm = spec.joints[0].jm
    ops = list(jm.merging) + list(jm.split_ops)
    for bits in itertools.product((0, 1), repeat=len(ops)):
        tab = StabilizerTableau(8)
        encode(tab, a, labels["A"])
        encode(tab, b, labels["B"])
        dense = _dense_code_state((a, b), prep_ops)
        try:
            outcome = run_protocol(spec, tab, Executor(), ancilla_forced=bits, correct=False)
        except ImpossibleOutcomeError:
            result.skipped += 1
            continue
        for op, bit in zip(ops, bits):
            dense.measure_pauli(op, forced=bit)
        outcome.frame.apply_to(tab)
        if not outcome.frame.pauli.is_identity():
            dense.apply_pauli(outcome.frame.pauli)
        m1 = outcome.records[0].m1
        target = _dense_code_state((a, b), expected_ops(m1))
        from_tab = DenseState.from_stabilizers(tab.stab_gens)
        result.checks += 1
        if not dense.equals_up_to_phase(target):
            result.fail(f"bits {bits}: dense replay is not the expected Bell state for m1={m1}")
        if not from_tab.equals_up_to_phase(target):
            result.fail(f"bits {bits}: tableau state is not the expected Bell state for m1={m1}")
    result.seconds = time.perf_counter() - start
    return result


def rough_branch_suite() -> SuiteResult:
    """Rough LS on |0_L 0_L>: φ+ when m⊕m' = 0, φ- otherwise, for every m''."""
    spec = PROTOCOLS["bell_rough"]
    a, b = spec.codes["A"], spec.codes["B"]
    zz = multiply(a.logical_z, b.logical_z)
    xx = multiply(a.logical_x, b.logical_x)
    return _bell_branch_suite("branches:rough", spec, lambda m1: [zz, -xx if m1 else xx])


def smooth_branch_suite() -> SuiteResult:
    """Smooth LS on |+_L +_L>: φ+ when m = 0, ψ+ when m = 1."""
    spec = PROTOCOLS["bell_smooth"]
    a, b = spec.codes["A"], spec.codes["B"]
    zz = multiply(a.logical_z, b.logical_z)
    xx = multiply(a.logical_x, b.logical_x)
    return _bell_branch_suite("branches:smooth", spec, lambda m1: [-zz if m1 else zz, xx])


def _logical_paulis(k: int):
    for combo in itertools.product("IXYZ", repeat=k):
        if any(c != "I" for c in combo):
            yield combo


def _physical_logical(spec: ProtocolSpec, combo: Sequence[str], n: int) -> PauliString:
    op = PauliString(n)
    for role, letter in zip(spec.outputs, combo):
        if letter != "I":
            op = multiply(op, spec.codes[role].embed(n).logical(letter))
    return op


def channel_suite(name: str, labels: Sequence[str] | None = None) -> SuiteResult:
    """Corrected protocol output vs the ideal logical map, every branch and input.

    Inputs range over the six cardinal states per input code; every ancilla
    and readout bit is forced both ways (impossible patterns are skipped).
    """
    spec = PROTOCOLS[name]
    gate, mapping = IDEAL_MAPS[name]
    labels = list(labels or LOGICAL_LABELS)
    result = SuiteResult(f"branches:{name}")
    start = time.perf_counter()
    n_anc = spec.n_ancilla_bits
    n_read = len(spec.readouts)
    n_out = len(spec.outputs)
    n_phys = spec.n_data
    out_index = {r: i for i, r in enumerate(spec.outputs)}
    for inputs in itertools.product(labels, repeat=len(spec.inputs)):
        ideal = DenseState(n_out)
        for role, label in zip(spec.inputs, inputs):
            _prep(ideal, out_index[mapping[role]], label)
        if gate == "H":
            ideal.apply_gate("H", out_index["B"])
        elif gate == "CNOT":
            ideal.apply_gate("CNOT", out_index["C"], out_index["T"])
        want = {combo: ideal.expectation(_single(n_out, dict(enumerate(combo)))) for combo in _logical_paulis(n_out)}
        template = StabilizerTableau(n_phys)
        for role, label in role_labels(spec, inputs).items():
            encode(template, spec.codes[role], label)
        for bits in itertools.product((0, 1), repeat=n_anc + n_read):
            tab = template.copy()
            try:
                outcome = run_protocol(spec, tab, Executor(), bits[:n_anc], bits[n_anc:])
            except ImpossibleOutcomeError:
                result.skipped += 1
                continue
            outcome.frame.apply_to(tab)
            result.checks += 1
            where = f"inputs {''.join(inputs)} bits {''.join(map(str, bits))}"
            for role in spec.outputs:
                if any(s != 1 for s in syndromes(tab, spec.codes[role])):
                    result.fail(f"{where}: output code {role} left its code space")
            for combo, value in want.items():
                got = tab.expectation(_physical_logical(spec, combo, n_phys))
                if abs(got - value) > 1e-9:
                    result.fail(f"{where}: <{''.join(combo)}> is {got}, ideal {value:+.3f}")
                    break
    result.seconds = time.perf_counter() - start
    return result


SUITES = {
    "oracle": lambda seed: [oracle_suite(seed=seed)],
    "branches": lambda seed: [
        rough_branch_suite(),
        smooth_branch_suite(),
        channel_suite("teleport"),
        channel_suite("hadamard"),
        channel_suite("cnot"),
    ],
}


def run_suites(which: str = "all", seed: int = 0) -> list[SuiteResult]:
    names = list(SUITES) if which == "all" else [which]
    out = []
    for name in names:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}")
        out += SUITES[name](seed)
    return out
