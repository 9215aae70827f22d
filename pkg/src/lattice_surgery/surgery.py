"""Lattice surgery: merge, split, joint logical measurements and the
measurement-based protocols built from them.

A joint measurement of ``P_A ⊗ P_B`` measures a set of merging stabilizers
whose product equals ``±P_A P_B`` times an element of the two codes'
stabilizer group, then measures original stabilizers to split the merged
code again.  Split outcomes are not corrected physically; the required
Pauli is recorded in a :class:`PauliFrame` and applied when measurement
results are interpreted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Sequence

from .codes import StabilizerCode, four_qubit_code, normalize_label
from .noise import Executor
from .pauli import (
    PauliError,
    PauliString,
    format_pauli,
    gf2_rank,
    group_sign,
    multiply,
    parse,
    product,
)
from .tableau import StabilizerTableau

__all__ = [
    "SurgeryError",
    "PauliFrame",
    "SurgeryRecord",
    "JointMeasurement",
    "rough_joint",
    "smooth_joint",
    "zx_joint",
    "merge",
    "split",
    "joint_measurement",
    "ProtocolSpec",
    "ProtocolOutcome",
    "PROTOCOLS",
    "protocol",
    "run_protocol",
    "correction_tables",
    "readout_letters",
]


class SurgeryError(ValueError):
    """Invalid merging set or protocol request."""


# ---------------------------------------------------------------------------
# Pauli frame


class PauliFrame:
    """Pending physical Pauli correction (phase is irrelevant and dropped)."""

    __slots__ = ("n_qubits", "x_mask", "z_mask")

    def __init__(self, n_qubits: int, x_mask: int = 0, z_mask: int = 0):
        self.n_qubits = n_qubits
        self.x_mask = x_mask
        self.z_mask = z_mask

    def add(self, p: PauliString) -> None:
        if p.n_qubits != self.n_qubits:
            raise PauliError("frame and operator sizes differ")
        self.x_mask ^= p.x_mask
        self.z_mask ^= p.z_mask

    def __mul__(self, other: "PauliFrame") -> "PauliFrame":
        return PauliFrame(self.n_qubits, self.x_mask ^ other.x_mask, self.z_mask ^ other.z_mask)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliFrame)
            and (self.n_qubits, self.x_mask, self.z_mask) == (other.n_qubits, other.x_mask, other.z_mask)
        )

    def copy(self) -> "PauliFrame":
        return PauliFrame(self.n_qubits, self.x_mask, self.z_mask)

    @property
    def pauli(self) -> PauliString:
        return PauliString(self.n_qubits, self.x_mask, self.z_mask)

    def flips(self, op: PauliString) -> int:
        """1 if the frame anticommutes with ``op`` (its reading is inverted)."""
        return 0 if self.pauli.commutes(op) else 1

    def flips_qubit(self, qubit: int, letter: str) -> int:
        x = self.x_mask >> qubit & 1
        z = self.z_mask >> qubit & 1
        if letter == "Z":
            return x
        if letter == "X":
            return z
        return x ^ z

    def logical_exponents(self, code: StabilizerCode) -> tuple[int, int]:
        """(a, b) such that the frame acts on ``code`` as X_L^a Z_L^b."""
        return self.flips(code.logical_z), self.flips(code.logical_x)

    def apply_to(self, state: StabilizerTableau) -> None:
        state.apply_pauli(self.pauli)

    def __repr__(self) -> str:
        return f"PauliFrame({format_pauli(self.pauli)})"


@dataclass(frozen=True)
class SurgeryRecord:
    boundary: str
    merge_bits: tuple[int, ...]
    split_bits: tuple[int, ...]
    m1: int

    def to_dict(self) -> dict:
        return {
            "boundary": self.boundary,
            "merge_bits": list(self.merge_bits),
            "split_bits": list(self.split_bits),
            "m1": self.m1,
        }


# ---------------------------------------------------------------------------
# joint measurements


def _commuting_subgroup(gens: Sequence[PauliString], others: Sequence[PauliString]) -> list[PauliString]:
    """Generators of the subgroup of <gens> commuting with every ``others``."""
    rows = []
    for g in gens:
        syndrome = sum((0 if g.commutes(o) else 1) << j for j, o in enumerate(others))
        rows.append([syndrome, g])
    out = []
    while rows:
        syn, g = rows.pop(0)
        if syn == 0:
            out.append(g)
            continue
        low = syn & -syn
        for row in rows:
            if row[0] & low:
                row[0] ^= syn
                row[1] = multiply(g, row[1])
    return out


@dataclass(frozen=True)
class JointMeasurement:
    name: str
    boundary: str
    codes: tuple[StabilizerCode, StabilizerCode]
    op_a: PauliString
    op_b: PauliString
    merging: tuple[PauliString, ...]
    split_ops: tuple[PauliString, ...]
    split_corrections: tuple[PauliString | None, ...] = field(repr=False)
    sign: int = 1

    @classmethod
    def build(
        cls,
        name: str,
        boundary: str,
        code_a: StabilizerCode,
        code_b: StabilizerCode,
        op_a: PauliString,
        op_b: PauliString,
        merging: Sequence[PauliString],
        split_ops: Sequence[PauliString] | None = None,
    ) -> "JointMeasurement":
        """Validate a merging set and derive split measurements and corrections."""
        merging = tuple(merging)
        if not merging:
            raise SurgeryError("empty merging set")
        for i, m in enumerate(merging):
            if not m.is_hermitian:
                raise SurgeryError(f"merging operator {format_pauli(m)} is not Hermitian")
            for other in merging[i + 1 :]:
                if not m.commutes(other):
                    raise SurgeryError(f"merging operators {format_pauli(m)}, {format_pauli(other)} anticommute")
        joint = multiply(op_a, op_b)
        if not all(joint.commutes(m) for m in merging):
            raise SurgeryError("joint logical does not commute with the merging operators")
        original = code_a.generators + code_b.generators
        residual = multiply(product(merging), joint)
        sign = group_sign(residual, original) if residual.is_hermitian else None
        if sign is None:
            raise SurgeryError(
                f"merging product does not equal {format_pauli(op_a)}·{format_pauli(op_b)} up to stabilizers"
            )
        kept = _commuting_subgroup(original, merging)
        n_data = code_a.n_data + code_b.n_data
        if gf2_rank(list(merging) + kept) != n_data - 1:
            raise SurgeryError("merged code does not encode exactly one logical qubit")
        if split_ops is None:
            chosen: list[PauliString] = []
            for g in original:
                if all(g.commutes(m) for m in merging):
                    continue
                if gf2_rank(kept + chosen + [g]) > gf2_rank(kept + chosen):
                    chosen.append(g)
            split_ops = chosen
        split_ops = tuple(split_ops)
        if gf2_rank(kept + list(split_ops)) != gf2_rank(list(original)):
            raise SurgeryError("split measurements do not restore the original codes")
        corrections = tuple(_split_correction(s, split_ops, merging) for s in split_ops)
        return cls(name, boundary, (code_a, code_b), op_a, op_b, merging, split_ops, corrections, sign)

    @property
    def letters(self) -> tuple[str, str]:
        """Logical letters of the measured product, e.g. ("Z", "X")."""
        out = []
        for code, op in zip(self.codes, (self.op_a, self.op_b)):
            out.append(next(l for l in "XZY" if code.logical(l).unsigned() == op.unsigned()))
        return out[0], out[1]

    @property
    def joint_operator(self) -> PauliString:
        return multiply(self.op_a, self.op_b)

    def embed(self, n_qubits: int) -> "JointMeasurement":
        """The same joint measurement inside a register of ``n_qubits``."""
        if n_qubits == self.op_a.n_qubits:
            return self
        return JointMeasurement(
            self.name,
            self.boundary,
            tuple(c.embed(n_qubits) for c in self.codes),
            self.op_a.embed(n_qubits),
            self.op_b.embed(n_qubits),
            tuple(m.embed(n_qubits) for m in self.merging),
            tuple(s.embed(n_qubits) for s in self.split_ops),
            tuple(None if c is None else c.embed(n_qubits) for c in self.split_corrections),
            self.sign,
        )

    def m1(self, merge_bits: Sequence[int]) -> int:
        bit = 0
        for b in merge_bits:
            bit ^= b
        return bit ^ (1 if self.sign < 0 else 0)


_EMBEDDED: dict = {}


def _embedded(jm: JointMeasurement, n_qubits: int) -> JointMeasurement:
    key = (id(jm), n_qubits)
    hit = _EMBEDDED.get(key)
    if hit is None or hit[0] is not jm:
        hit = _EMBEDDED[key] = (jm, jm.embed(n_qubits))
    return hit[1]


def _split_correction(s: PauliString, split_ops, merging) -> PauliString | None:
    """Product of merging operators anticommuting with ``s`` only, if any."""
    k = len(merging)
    for mask in range(1, 1 << k):
        cand = product([merging[i] for i in range(k) if mask >> i & 1])
        if cand.commutes(s):
            continue
        if all(cand.commutes(t) for t in split_ops if t is not s):
            return cand.unsigned()
    return None


def _q(code: StabilizerCode, local: int) -> int:
    """1-based global label of the code's ``local``-th qubit (1-based)."""
    return code.qubits[local - 1] + 1


def _op(code: StabilizerCode, text: str) -> PauliString:
    return parse(text, code.n_qubits)


def rough_joint(code_a: StabilizerCode, code_b: StabilizerCode) -> JointMeasurement:
    """X_L^A X_L^B via X-type merging checks across A's right and B's left edge."""
    a3, a4, b1, b2 = _q(code_a, 3), _q(code_a, 4), _q(code_b, 1), _q(code_b, 2)
    merging = (_op(code_a, f"+X{a3}X{b1}"), _op(code_a, f"+X{a4}X{b2}"))
    return JointMeasurement.build("XX", "rough", code_a, code_b, code_a.logical_x, code_b.logical_x, merging)


def smooth_joint(code_a: StabilizerCode, code_b: StabilizerCode) -> JointMeasurement:
    """Z_L^A Z_L^B via one Z-type check across A's bottom and B's top edge.

    The split measures A's X-type stabilizer, which commutes with the merging
    check for these distance-2 codes and so is deterministic without noise.
    """
    a2, a4, b1, b3 = _q(code_a, 2), _q(code_a, 4), _q(code_b, 1), _q(code_b, 3)
    merging = (_op(code_a, f"+Z{a2}Z{a4}Z{b1}Z{b3}"),)
    return JointMeasurement.build(
        "ZZ", "smooth", code_a, code_b, code_a.logical_z, code_b.logical_z, merging, (code_a.generators[2],)
    )


def zx_joint(code_a: StabilizerCode, code_b: StabilizerCode) -> JointMeasurement:
    """Z_L^A X_L^B via mixed checks Z_a2 X_b1, Z_a4 X_b2."""
    a2, a4, b1, b2 = _q(code_a, 2), _q(code_a, 4), _q(code_b, 1), _q(code_b, 2)
    merging = (_op(code_a, f"+Z{a2}X{b1}"), _op(code_a, f"+Z{a4}X{b2}"))
    return JointMeasurement.build("ZX", "mixed", code_a, code_b, code_a.logical_z, code_b.logical_x, merging)


def merge(
    state: StabilizerTableau,
    jm: JointMeasurement,
    executor: Executor,
    forced: Sequence[int | None] | None = None,
) -> tuple[int, ...]:
    """Measure the merging operators; bit i is the outcome of the i-th one."""
    forced = forced or [None] * len(jm.merging)
    return tuple(executor.measure(state, m, forced=f, slot=i) for i, (m, f) in enumerate(zip(jm.merging, forced)))


def split(
    state: StabilizerTableau,
    jm: JointMeasurement,
    executor: Executor,
    frame: PauliFrame,
    forced: Sequence[int | None] | None = None,
) -> tuple[int, ...]:
    """Measure the split operators; -1 outcomes add their correction to ``frame``."""
    forced = forced or [None] * len(jm.split_ops)
    bits = []
    for i, (s, fix, f) in enumerate(zip(jm.split_ops, jm.split_corrections, forced)):
        bit = executor.measure(state, s, forced=f, slot=i)
        if bit and fix is not None:
            frame.add(fix)
        bits.append(bit)
    return tuple(bits)


def joint_measurement(
    state: StabilizerTableau,
    jm: JointMeasurement,
    executor: Executor,
    frame: PauliFrame,
    merge_forced: Sequence[int | None] | None = None,
    split_forced: Sequence[int | None] | None = None,
) -> SurgeryRecord:
    """Merge then split; returns the outcome record including m1."""
    mbits = merge(state, jm, executor, merge_forced)
    sbits = split(state, jm, executor, frame, split_forced)
    return SurgeryRecord(jm.boundary, mbits, sbits, jm.m1(mbits))


# ---------------------------------------------------------------------------
# protocols


def readout_letters(code: StabilizerCode, basis: str) -> dict[int, str]:
    """Per-qubit measurement letter for a destructive logical readout.

    Qubits in the logical operator's support use its letters; the rest are
    read in X for the X basis and in Z otherwise.
    """
    op = code.logical(basis)
    rest = "X" if basis == "X" else "Z"
    return {q: (op.letter(q) if op.support_mask >> q & 1 else rest) for q in code.qubits}


@dataclass(frozen=True)
class JointStep:
    jm: JointMeasurement
    role_a: str
    role_b: str


@dataclass(frozen=True)
class ReadoutStep:
    role: str
    basis: str
    name: str


@dataclass(frozen=True)
class ProtocolSpec:
    name: str
    roles: tuple[str, ...]
    codes: dict
    inputs: tuple[str, ...]
    fixed_inputs: dict
    joints: tuple[JointStep, ...]
    readouts: tuple[ReadoutStep, ...]
    outputs: tuple[str, ...]
    default_inputs: tuple[str, ...]

    @property
    def n_data(self) -> int:
        return 4 * len(self.roles)

    @property
    def n_ancilla_bits(self) -> int:
        return sum(len(s.jm.merging) + len(s.jm.split_ops) for s in self.joints)

    @property
    def branch_names(self) -> tuple[str, ...]:
        if len(self.joints) == 1:
            names = ["m1"]
        else:
            names = [f"m1_{s.jm.name}" for s in self.joints]
        return tuple(names + [r.name for r in self.readouts])

    def ancilla_layout(self) -> list[str]:
        """Names of the ancilla bits in the order policies address them."""
        out = []
        for step in self.joints:
            prefix = "" if len(self.joints) == 1 else f"{step.jm.name}:"
            out += [f"{prefix}merge{i + 1}" for i in range(len(step.jm.merging))]
            out += [f"{prefix}split{i + 1}" for i in range(len(step.jm.split_ops))]
        return out


def _four_qubit_codes(roles: Sequence[str]) -> dict:
    n = 4 * len(roles)
    return {r: four_qubit_code(4 * i, n, r) for i, r in enumerate(roles)}


def _build_protocols() -> dict:
    out = {}
    ab = _four_qubit_codes(("A", "B"))
    out["bell_rough"] = ProtocolSpec(
        "bell_rough", ("A", "B"), ab, ("A", "B"), {}, (JointStep(rough_joint(ab["A"], ab["B"]), "A", "B"),),
        (), ("A", "B"), ("0", "0"),
    )
    out["bell_smooth"] = ProtocolSpec(
        "bell_smooth", ("A", "B"), ab, ("A", "B"), {}, (JointStep(smooth_joint(ab["A"], ab["B"]), "A", "B"),),
        (), ("A", "B"), ("+", "+"),
    )
    out["teleport"] = ProtocolSpec(
        "teleport", ("A", "B"), ab, ("A",), {"B": "0"}, (JointStep(rough_joint(ab["A"], ab["B"]), "A", "B"),),
        (ReadoutStep("A", "Z", "m2"),), ("B",), ("0",),
    )
    out["hadamard"] = ProtocolSpec(
        "hadamard", ("A", "B"), ab, ("A",), {"B": "0"}, (JointStep(zx_joint(ab["A"], ab["B"]), "A", "B"),),
        (ReadoutStep("A", "X", "m2"),), ("B",), ("0",),
    )
    cmt = _four_qubit_codes(("C", "M", "T"))
    out["cnot"] = ProtocolSpec(
        "cnot", ("C", "M", "T"), cmt, ("C", "T"), {"M": "+"},
        (
            JointStep(smooth_joint(cmt["C"], cmt["M"]), "C", "M"),
            JointStep(rough_joint(cmt["M"], cmt["T"]), "M", "T"),
        ),
        (ReadoutStep("M", "Z", "c"),), ("C", "T"), ("+", "0"),
    )
    return out


PROTOCOLS: dict[str, ProtocolSpec] = _build_protocols()


def protocol(name: str) -> ProtocolSpec:
    try:
        return PROTOCOLS[name]
    except KeyError:
        raise SurgeryError(f"unknown protocol {name!r}; choose from {sorted(PROTOCOLS)}") from None


@lru_cache(maxsize=None)
def correction_tables() -> dict:
    """Branch-indexed logical corrections derived from the dense oracle."""
    text = resources.files(__package__).joinpath("corrections.json").read_text()
    return json.loads(text)


def correction_for(spec: ProtocolSpec, branch: Sequence[int]) -> dict[str, str]:
    """Logical Pauli letter per output role for this outcome branch."""
    table = correction_tables()[spec.name]
    letters = table["table"]["".join(str(b) for b in branch)]
    return dict(zip(table["outputs"], letters))


@dataclass
class ProtocolOutcome:
    records: list[SurgeryRecord]
    frame: PauliFrame
    branch: tuple[int, ...]
    readout_bits: dict[str, dict[int, int]]
    corrections: dict[str, str]

    @property
    def ancilla_bits(self) -> tuple[int, ...]:
        bits: list[int] = []
        for r in self.records:
            bits += list(r.merge_bits) + list(r.split_bits)
        return tuple(bits)

    def to_dict(self) -> dict:
        return {
            "records": [r.to_dict() for r in self.records],
            "branch": list(self.branch),
            "ancilla_bits": list(self.ancilla_bits),
            "corrections": dict(self.corrections),
            "frame": format_pauli(self.frame.pauli),
        }


def read_code(
    state: StabilizerTableau,
    code: StabilizerCode,
    basis: str,
    executor: Executor,
    frame: PauliFrame,
) -> dict[int, int]:
    """Measure every data qubit of ``code``; bits are frame-corrected."""
    bits = {}
    for q, letter in readout_letters(code, basis).items():
        bits[q] = executor.readout(state, q, letter) ^ frame.flips_qubit(q, letter)
    return bits


def logical_bit(code: StabilizerCode, basis: str, bits: dict[int, int]) -> int:
    """Outcome bit of the signed logical ``basis`` operator from readout bits."""
    op = code.logical(basis)
    bit = 1 if op.phase_exp == 2 else 0
    for q in op.support:
        bit ^= bits[q]
    return bit


def run_protocol(
    spec: ProtocolSpec,
    state: StabilizerTableau,
    executor: Executor,
    ancilla_forced: Sequence[int | None] | None = None,
    readout_forced: Sequence[int | None] | None = None,
    correct: bool = True,
) -> ProtocolOutcome:
    """Run the joint measurements and intermediate readouts of ``spec``.

    Inputs must already be encoded.  ``ancilla_forced`` pins merge/split bits
    in :meth:`ProtocolSpec.ancilla_layout` order; ``readout_forced`` pins the
    logical readout bits by projecting the logical operator first.  With
    ``correct`` the oracle-derived logical correction for the observed branch
    is added to the frame.
    """
    frame = PauliFrame(state.n_qubits)
    forced = list(ancilla_forced) if ancilla_forced is not None else [None] * spec.n_ancilla_bits
    if len(forced) != spec.n_ancilla_bits:
        raise SurgeryError(f"{spec.name} has {spec.n_ancilla_bits} ancilla bits, got {len(forced)} forced values")
    records = []
    pos = 0
    for step in spec.joints:
        jm = _embedded(step.jm, state.n_qubits)
        nm, ns = len(jm.merging), len(jm.split_ops)
        rec = joint_measurement(
            state, jm, executor, frame, forced[pos : pos + nm], forced[pos + nm : pos + nm + ns]
        )
        pos += nm + ns
        records.append(rec)
    branch = [r.m1 for r in records]
    readout_bits = {}
    rforced = list(readout_forced) if readout_forced is not None else [None] * len(spec.readouts)
    for step, f in zip(spec.readouts, rforced):
        code = spec.codes[step.role].embed(state.n_qubits)
        if f is not None:
            op = code.logical(step.basis)
            flip = frame.flips(op)
            state.measure(op, forced=f ^ flip)
        bits = read_code(state, code, step.basis, executor, frame)
        readout_bits[step.role] = bits
        branch.append(logical_bit(code, step.basis, bits))
    branch_t = tuple(branch)
    corrections: dict[str, str] = {}
    if correct:
        corrections = correction_for(spec, branch_t)
        for role, letters in corrections.items():
            code = spec.codes[role].embed(state.n_qubits)
            if letters in ("X", "Y"):
                frame.add(code.logical_x)
            if letters in ("Z", "Y"):
                frame.add(code.logical_z)
    return ProtocolOutcome(records, frame, branch_t, readout_bits, corrections)


# ---------------------------------------------------------------------------
# logical-level model: one tableau qubit per code


_LABEL_GATES = {"0": (), "1": ("X",), "+": ("H",), "-": ("X", "H"), "+i": ("H", "S"), "-i": ("X", "H", "S")}


def prepare_label(state: StabilizerTableau, qubit: int, label: str) -> None:
    """Turn |0> on ``qubit`` into the single-qubit state named by ``label``."""
    for g in _LABEL_GATES[normalize_label(label)]:
        state.apply_gate(g, qubit)


def role_labels(spec: ProtocolSpec, inputs: Sequence[str]) -> dict[str, str]:
    if len(inputs) != len(spec.inputs):
        raise SurgeryError(f"{spec.name} takes {len(spec.inputs)} input label(s), got {len(inputs)}")
    labels = dict(spec.fixed_inputs)
    labels.update({role: normalize_label(lab) for role, lab in zip(spec.inputs, inputs)})
    return labels


def logical_model(
    spec: ProtocolSpec,
    inputs: Sequence[str],
    branch: Sequence[int],
    correct: bool = True,
) -> StabilizerTableau:
    """Ideal protocol on bare logical qubits (one per role) for a fixed branch.

    Raises ImpossibleOutcomeError when the branch has zero probability.
    """
    k = len(spec.roles)
    index = {r: i for i, r in enumerate(spec.roles)}
    state = StabilizerTableau(k)
    for role, label in role_labels(spec, inputs).items():
        prepare_label(state, index[role], label)
    bits = list(branch)
    for step, bit in zip(spec.joints, bits):
        la, lb = step.jm.letters
        op = PauliString.from_sparse(k, {index[step.role_a]: la, index[step.role_b]: lb})
        state.measure(op, forced=bit)
    for step, bit in zip(spec.readouts, bits[len(spec.joints) :]):
        state.measure(PauliString.single(k, index[step.role], step.basis), forced=bit)
    if correct:
        for role, letter in correction_for(spec, branch).items():
            if letter != "I":
                state.apply_pauli(PauliString.single(k, index[role], letter))
    return state


def restrict(generators: Sequence[PauliString], keep: Sequence[int]) -> list[PauliString]:
    """Generators of the subgroup supported on ``keep``, re-indexed to it.

    Suited to states where the discarded qubits are in a product state.
    """
    n = generators[0].n_qubits
    drop = [q for q in range(n) if q not in keep]
    rows = list(generators)
    for q in drop:
        for part in ("x", "z"):
            def has(p, q=q, part=part):
                return (p.x_mask if part == "x" else p.z_mask) >> q & 1

            pivot = next((r for r in rows if has(r)), None)
            if pivot is None:
                continue
            rows = [multiply(pivot, r) if has(r) else r for r in rows if r is not pivot]
    out = []
    for r in rows:
        letters = {i: r.letter(q) for i, q in enumerate(keep) if r.letter(q) != "I"}
        if letters:
            out.append(PauliString.from_sparse(len(keep), letters, r.phase_exp))
    return out


def ideal_output(
    spec: ProtocolSpec, inputs: Sequence[str], branch: Sequence[int], correct: bool = True
) -> list[PauliString]:
    """Stabilizer generators of the ideal output logical state (output roles only)."""
    state = logical_model(spec, inputs, branch, correct)
    keep = [spec.roles.index(r) for r in spec.outputs]
    return restrict(state.stab_gens, keep)
