"""Stochastic Pauli noise and ancilla-based stabilizer extraction.

A stabilizer ``P`` is measured by rotating each support qubit so that its
Pauli becomes Z, copying the Z parity into a fresh |0> ancilla with CNOTs,
rotating back, and reading the ancilla in Z.  Y is rotated with S† then H.
Noise is inserted after each gate: a uniformly random non-identity Pauli on
the gate's qubits with probability ``p1`` (one-qubit gates) or ``p2``
(two-qubit gates).  The random stream is touched only for channels with
nonzero probability, so an all-zero model replays the noiseless trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Mapping, NamedTuple, Sequence

from .pauli import PauliError, PauliString, format_pauli
from .tableau import StabilizerTableau

__all__ = [
    "NoiseModel",
    "GateEvent",
    "ExtractionCircuit",
    "synthesize_extraction",
    "run_noisy",
    "Executor",
]

_PAULIS_1Q = ("X", "Y", "Z")
_PAULIS_2Q = tuple((a, b) for a in "IXYZ" for b in "IXYZ" if (a, b) != ("I", "I"))


@dataclass(frozen=True)
class NoiseModel:
    p1: float = 0.0
    p2: float = 0.0
    p_meas: float = 0.0
    p_prep: float = 0.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not isinstance(value, (int, float)) or not 0.0 <= value <= 1.0:
                raise ValueError(f"noise probability {name}={value!r} outside [0, 1]")
            object.__setattr__(self, name, float(value))

    @property
    def is_noiseless(self) -> bool:
        return self.p1 == self.p2 == self.p_meas == self.p_prep == 0.0

    @classmethod
    def from_dict(cls, doc: Mapping | None) -> "NoiseModel":
        doc = dict(doc or {})
        unknown = set(doc) - {"p1", "p2", "p_meas", "p_prep"}
        if unknown:
            raise ValueError(f"unknown noise keys {sorted(unknown)}")
        return cls(**doc)

    def to_dict(self) -> dict:
        return asdict(self)


class GateEvent(NamedTuple):
    kind: str  # "prep", "gate", "measure"
    name: str
    targets: tuple[int, ...]


@dataclass(frozen=True)
class ExtractionCircuit:
    operator: PauliString
    ancilla: int
    events: tuple[GateEvent, ...]

    @property
    def negative(self) -> bool:
        return self.operator.phase_exp == 2


def synthesize_extraction(p: PauliString, ancilla: int) -> ExtractionCircuit:
    """Ancilla circuit measuring the signed Hermitian ``p``."""
    if not p.is_hermitian:
        raise PauliError(f"cannot extract non-Hermitian {format_pauli(p)}")
    if p.is_identity():
        raise PauliError("nothing to extract from the identity")
    if not 0 <= ancilla < p.n_qubits:
        raise IndexError(f"ancilla {ancilla} outside the register")
    if p.support_mask >> ancilla & 1:
        raise ValueError(f"ancilla {ancilla + 1} overlaps the support of {format_pauli(p)}")
    events = [GateEvent("prep", "Z", (ancilla,))]
    for q in p.support:
        letter = p.letter(q)
        pre, post = {"Z": ((), ()), "X": (("H",), ("H",)), "Y": (("SDG", "H"), ("H", "S"))}[letter]
        events += [GateEvent("gate", g, (q,)) for g in pre]
        events.append(GateEvent("gate", "CNOT", (q, ancilla)))
        events += [GateEvent("gate", g, (q,)) for g in post]
    events.append(GateEvent("measure", "Z", (ancilla,)))
    return ExtractionCircuit(p, ancilla, tuple(events))


_SINGLES: dict = {}


class _FlippedBits:
    """Random source whose bits are XOR-ed with a constant."""

    __slots__ = ("rng", "flip")

    def __init__(self, rng, flip: int):
        self.rng = rng
        self.flip = flip

    def getrandbits(self, k: int) -> int:
        return self.rng.getrandbits(k) ^ self.flip


def _inject(state: StabilizerTableau, letters: Sequence[str], targets: Sequence[int]) -> None:
    for letter, q in zip(letters, targets):
        if letter != "I":
            getattr(state, letter.lower())(q)


def run_noisy(
    state: StabilizerTableau,
    circuit: ExtractionCircuit,
    model: NoiseModel,
    rng,
    forced: int | None = None,
) -> int:
    """Execute ``circuit`` with noise; return the reported outcome bit.

    The reported bit is ancilla bit ⊕ readout flip ⊕ operator sign.  With
    ``forced`` the flip is drawn first and the ancilla outcome chosen to make
    the report equal ``forced``.  A random ancilla outcome is drawn so that,
    absent noise, the report equals the bit a direct measurement would draw
    from the same stream.
    """
    neg = 1 if circuit.negative else 0
    anc = circuit.ancilla
    reported = None
    for kind, name, targets in circuit.events:
        if kind == "prep":
            if model.p_prep and rng.random() < model.p_prep:
                state.x(anc)
        elif kind == "gate":
            state.apply_gate(name, *targets)
            if len(targets) == 1:
                if model.p1 and rng.random() < model.p1:
                    _inject(state, (rng.choice(_PAULIS_1Q),), targets)
            elif model.p2 and rng.random() < model.p2:
                _inject(state, rng.choice(_PAULIS_2Q), targets)
        else:
            flip = 1 if model.p_meas and rng.random() < model.p_meas else 0
            zq = PauliString.single(state.n_qubits, anc, "Z")
            if forced is not None:
                raw = state.measure(zq, forced=forced ^ flip ^ neg).bit
            else:
                raw = state.measure(zq, _FlippedBits(rng, neg)).bit
            if raw:
                state.x(anc)  # reset for reuse
            reported = raw ^ flip ^ neg
    return reported


class Executor:
    """Measurement back end shared by encoding, surgery, and readout.

    Without a noise model (or with an all-zero one) stabilizers are measured
    directly on the tableau; otherwise each measurement runs an extraction
    circuit on ancilla ``ancillas[slot]``.  Without an rng, random outcomes
    resolve to bit 0 unless forced.
    """

    def __init__(self, rng=None, model: NoiseModel | None = None, ancillas: Sequence[int] = ()):
        self.rng = rng
        self.model = model if model is not None else NoiseModel()
        self.ancillas = tuple(ancillas)
        self.noisy = not self.model.is_noiseless
        if self.noisy and rng is None:
            raise ValueError("a noisy executor needs an rng")
        if self.noisy and not self.ancillas:
            raise ValueError("a noisy executor needs ancilla qubits")
        self._circuits: dict = {}

    def _direct(self, state: StabilizerTableau, op: PauliString, forced: int | None) -> int:
        if forced is None and self.rng is None:
            if state.is_deterministic(op):
                return state.measure(op).bit
            forced = 0
        return state.measure(op, self.rng, forced=forced).bit

    def measure(self, state: StabilizerTableau, op: PauliString, forced: int | None = None, slot: int = 0) -> int:
        if not self.noisy:
            return self._direct(state, op, forced)
        anc = self.ancillas[slot % len(self.ancillas)]
        key = (op, anc)
        circuit = self._circuits.get(key)
        if circuit is None:
            circuit = self._circuits[key] = synthesize_extraction(op, anc)
        return run_noisy(state, circuit, self.model, self.rng, forced)

    def readout(self, state: StabilizerTableau, qubit: int, letter: str, forced: int | None = None) -> int:
        """Destructive single-qubit measurement in basis ``letter``."""
        key = (state.n_qubits, qubit, letter)
        op = _SINGLES.get(key)
        if op is None:
            op = _SINGLES[key] = PauliString.single(state.n_qubits, qubit, letter)
        if not self.noisy:
            return self._direct(state, op, forced)
        flip = 1 if self.model.p_meas and self.rng.random() < self.model.p_meas else 0
        if forced is not None:
            return state.measure(op, forced=forced ^ flip).bit ^ flip
        return state.measure(op, self.rng).bit ^ flip

    def __call__(self, state: StabilizerTableau, op: PauliString) -> int:
        return self.measure(state, op)
