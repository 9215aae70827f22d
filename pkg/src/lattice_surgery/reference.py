"""Dense state-vector simulator used as ground truth for small registers.

Amplitude index bit ``q`` holds qubit ``q`` (0-based), so the basis state
``|0101>`` written qubit-1-first is index ``0b1010``.  Everything here is
deliberately naive: each operation is a direct transcription of the matrix
definition.
"""

from __future__ import annotations

from typing import Iterable, Protocol, Sequence

import numpy as np

from .pauli import PauliError, PauliString, format_pauli
from .tableau import ImpossibleOutcomeError

__all__ = ["MAX_QUBITS", "DenseState", "pauli_matrix", "all_expectations"]

MAX_QUBITS = 12
_NORM_TOL = 1e-10
_ZERO_PROB = 1e-12

_SQRT_HALF = 1 / np.sqrt(2)
_ONE_QUBIT = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT_HALF,
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "SDG": np.array([[1, 0], [0, -1j]], dtype=complex),
}


class UniformSource(Protocol):
    def random(self) -> float: ...


def _check_size(n: int) -> None:
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"dense simulation supports 1..{MAX_QUBITS} qubits, got {n}")


def pauli_matrix(p: PauliString) -> np.ndarray:
    """Full 2^n x 2^n matrix of ``p`` (Kronecker product, qubit 0 least significant)."""
    _check_size(p.n_qubits)
    m = np.array([[1]], dtype=complex)
    for q in range(p.n_qubits):
        m = np.kron(_ONE_QUBIT[p.letter(q)], m)
    return (1j) ** p.phase_exp * m


class DenseState:
    def __init__(self, n_qubits: int, vector: np.ndarray | None = None):
        _check_size(n_qubits)
        self.n_qubits = n_qubits
        if vector is None:
            vector = np.zeros(1 << n_qubits, dtype=complex)
            vector[0] = 1
        else:
            vector = np.asarray(vector, dtype=complex).copy()
            if vector.shape != (1 << n_qubits,):
                raise ValueError("vector length does not match qubit count")
            norm = np.linalg.norm(vector)
            if abs(norm - 1) > _NORM_TOL:
                raise ValueError(f"state not normalized (norm {norm})")
        self.vector = vector

    @classmethod
    def from_stabilizers(cls, generators: Sequence[PauliString]) -> "DenseState":
        """The state fixed by ``n`` independent commuting signed generators."""
        if not generators:
            raise ValueError("need at least one generator")
        n = generators[0].n_qubits
        if len(generators) != n:
            raise ValueError(f"{len(generators)} generators do not fix a state on {n} qubits")
        seed = np.random.default_rng(12345)
        v = seed.normal(size=1 << n) + 1j * seed.normal(size=1 << n)
        state = cls.__new__(cls)
        state.n_qubits = n
        state.vector = v
        for g in generators:
            state.vector = 0.5 * (state.vector + state._pauli_vector(g))
        norm = np.linalg.norm(state.vector)
        if norm < 1e-8:
            raise ValueError("generators have no common +1 eigenstate")
        state.vector /= norm
        return state

    @classmethod
    def from_basis(cls, bits: str) -> "DenseState":
        """Computational basis state from a qubit-1-first bit string."""
        state = cls(len(bits))
        state.vector[0] = 0
        state.vector[int(bits[::-1], 2)] = 1
        return state

    def copy(self) -> "DenseState":
        return DenseState(self.n_qubits, self.vector)

    # -- unitaries ---------------------------------------------------------

    def _targets_ok(self, targets: Iterable[int]) -> None:
        ts = list(targets)
        if len(set(ts)) != len(ts) or any(not 0 <= t < self.n_qubits for t in ts):
            raise IndexError(f"bad targets {ts} for {self.n_qubits} qubits")

    def _apply_1q(self, u: np.ndarray, q: int) -> None:
        n = self.n_qubits
        v = self.vector.reshape(1 << (n - 1 - q), 2, 1 << q)
        self.vector = np.einsum("ab,ibj->iaj", u, v).reshape(-1)

    def apply_gate(self, gate: str, *targets: int) -> None:
        name = gate.upper()
        self._targets_ok(targets)
        if name in _ONE_QUBIT and len(targets) == 1:
            self._apply_1q(_ONE_QUBIT[name], targets[0])
            return
        if name in ("CNOT", "CX", "CZ") and len(targets) == 2:
            a, b = targets
            idx = np.arange(1 << self.n_qubits)
            ctrl = (idx >> a) & 1
            if name == "CZ":
                self.vector = self.vector * np.where(ctrl & (idx >> b) & 1, -1, 1)
            else:
                src = np.where(ctrl == 1, idx ^ (1 << b), idx)
                self.vector = self.vector[src]
            return
        raise ValueError(f"unsupported gate {gate!r} on targets {targets}")

    def _pauli_vector(self, p: PauliString) -> np.ndarray:
        if p.n_qubits != self.n_qubits:
            raise PauliError(f"operator on {p.n_qubits} qubits, state has {self.n_qubits}")
        idx = np.arange(1 << self.n_qubits)
        parity = np.bitwise_count(idx & p.z_mask) & 1
        phase = (1j) ** (p.phase_exp + (p.x_mask & p.z_mask).bit_count())
        out = np.empty_like(self.vector)
        out[idx ^ p.x_mask] = phase * np.where(parity, -1, 1) * self.vector
        return out

    def apply_pauli(self, p: PauliString) -> None:
        self.vector = self._pauli_vector(p)

    # -- measurement -------------------------------------------------------

    def expectation(self, p: PauliString) -> float:
        if not p.is_hermitian:
            raise PauliError(f"{format_pauli(p)} is not Hermitian")
        val = np.vdot(self.vector, self._pauli_vector(p))
        if abs(val.imag) > 1e-9:
            raise ArithmeticError(f"non-real expectation {val}")
        return float(val.real)

    def outcome_probability(self, p: PauliString, bit: int) -> float:
        proj = 0.5 * (self.vector + (-1) ** bit * self._pauli_vector(p))
        return float(np.vdot(proj, proj).real)

    def measure_pauli(
        self, p: PauliString, rng: UniformSource | None = None, *, forced: int | None = None
    ) -> int:
        """Projective measurement of ``p``; returns bit with eigenvalue ``(-1)**bit``."""
        if not p.is_hermitian:
            raise PauliError(f"{format_pauli(p)} is not Hermitian")
        pv = self._pauli_vector(p)
        plus = 0.5 * (self.vector + pv)
        p0 = float(np.vdot(plus, plus).real)
        if forced is not None:
            bit = forced & 1
        elif rng is None:
            raise ValueError("random measurement needs an rng or a forced bit")
        else:
            bit = 0 if rng.random() < p0 else 1
        prob = p0 if bit == 0 else 1 - p0
        if prob < _ZERO_PROB:
            raise ImpossibleOutcomeError(f"outcome {bit} of {format_pauli(p)} has zero probability")
        branch = plus if bit == 0 else self.vector - plus
        self.vector = branch / np.sqrt(prob)
        return bit

    # -- comparison --------------------------------------------------------

    def overlap(self, other: "DenseState") -> float:
        """|<self|other>|^2."""
        return float(abs(np.vdot(self.vector, other.vector)) ** 2)

    def equals_up_to_phase(self, other: "DenseState", tol: float = 1e-9) -> bool:
        return self.n_qubits == other.n_qubits and abs(self.overlap(other) - 1) < tol

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))

    def __repr__(self) -> str:
        terms = []
        for k in np.flatnonzero(np.abs(self.vector) > 1e-9):
            bits = format(int(k), f"0{self.n_qubits}b")[::-1]
            terms.append(f"{self.vector[k]:.3f}|{bits}>")
        return "DenseState(" + " + ".join(terms) + ")"


def all_expectations(state: DenseState) -> np.ndarray:
    """Array ``E[x_mask, z_mask]`` of <P(x, z)> over all 4^n unsigned Paulis.

    Uses <psi| X^x Z^z |psi> = sum_k conj(psi[k^x]) psi[k] (-1)^{|k&z|}, a
    Walsh-Hadamard transform per X pattern, then the i^{|x&z|} factor for Y.
    """
    n = state.n_qubits
    dim = 1 << n
    idx = np.arange(dim)
    psi = state.vector
    w = np.conj(psi[idx[:, None] ^ idx[None, :]]) * psi[None, :]  # w[x, k]
    parity = np.bitwise_count(idx[:, None] & idx[None, :]) & 1
    walsh = np.where(parity, -1.0, 1.0)
    e = w @ walsh
    ycount = np.bitwise_count(idx[:, None] & idx[None, :])
    e = e * (1j) ** ycount
    if np.max(np.abs(e.imag)) > 1e-9:
        raise ArithmeticError("non-real Pauli expectation")
    return e.real
