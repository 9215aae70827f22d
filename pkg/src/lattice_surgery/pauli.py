"""Signed multi-qubit Pauli operators.

A :class:`PauliString` stores one X bit and one Z bit per qubit, packed into
Python integers (bit ``q`` is qubit ``q``, 0-based), plus a global phase
``i**phase_exp``.  A qubit with both bits set carries ``Y``, so ``-Z1Z2`` is
``x_mask=0b00, z_mask=0b11, phase_exp=2``.

Text literals use 1-based qubit indices: ``"+X1X2X3X4"``, ``"-Z3Z4"``,
``"-iY1"``, ``"+I"``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "PauliError",
    "DimensionError",
    "PauliString",
    "multiply",
    "commutes",
    "parse",
    "format_pauli",
    "product",
    "symplectic_decompose",
    "group_sign",
    "canonical_generators",
    "gf2_rank",
    "dual_paulis",
]

_LETTERS = "IXZY"  # index = x + 2*z
_PHASE_PREFIX = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_PREFIX_PHASE = {"": 0, "+": 0, "-": 2, "+i": 1, "i": 1, "-i": 3}
_LITERAL = re.compile(r"^\s*([+-]?i?)\s*((?:[IXYZ]\d*)*)\s*$")
_TOKEN = re.compile(r"([IXYZ])(\d*)")


class PauliError(ValueError):
    """Malformed Pauli literal or invalid operator."""


class DimensionError(PauliError):
    """Operators act on different numbers of qubits."""


def _popcount(v: int) -> int:
    return v.bit_count()


@dataclass(frozen=True, slots=True)
class PauliString:
    n_qubits: int
    x_mask: int = 0
    z_mask: int = 0
    phase_exp: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise PauliError("n_qubits must be positive")
        limit = 1 << self.n_qubits
        if not (0 <= self.x_mask < limit and 0 <= self.z_mask < limit):
            raise PauliError(f"masks exceed {self.n_qubits} qubits")
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    # -- constructors -----------------------------------------------------

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits)

    @classmethod
    def single(cls, n_qubits: int, qubit: int, letter: str) -> "PauliString":
        """Single-qubit Pauli ``letter`` on 0-based ``qubit``."""
        return cls.from_sparse(n_qubits, {qubit: letter})

    @classmethod
    def from_sparse(cls, n_qubits: int, letters: dict, phase_exp: int = 0) -> "PauliString":
        x = z = 0
        for q, letter in letters.items():
            if not 0 <= q < n_qubits:
                raise PauliError(f"qubit {q} out of range for {n_qubits} qubits")
            code = _LETTERS.index(letter.upper())
            if code & 1:
                x |= 1 << q
            if code & 2:
                z |= 1 << q
        return cls(n_qubits, x, z, phase_exp)

    @classmethod
    def from_label(cls, label: str, phase_exp: int = 0) -> "PauliString":
        """Dense label such as ``"XIZY"`` (qubit 0 first)."""
        return cls.from_sparse(len(label), dict(enumerate(label)), phase_exp)

    # -- properties -------------------------------------------------------

    @property
    def is_hermitian(self) -> bool:
        return self.phase_exp % 2 == 0

    @property
    def sign(self) -> int:
        """+1 or -1 for Hermitian operators."""
        if not self.is_hermitian:
            raise PauliError(f"{self} is not Hermitian")
        return 1 if self.phase_exp == 0 else -1

    @property
    def support_mask(self) -> int:
        return self.x_mask | self.z_mask

    @property
    def weight(self) -> int:
        return _popcount(self.x_mask | self.z_mask)

    @property
    def support(self) -> list[int]:
        m = self.x_mask | self.z_mask
        return [q for q in range(self.n_qubits) if m >> q & 1]

    def letter(self, qubit: int) -> str:
        return _LETTERS[(self.x_mask >> qubit & 1) | ((self.z_mask >> qubit & 1) << 1)]

    def label(self) -> str:
        """Dense letter string without phase, qubit 0 first."""
        return "".join(self.letter(q) for q in range(self.n_qubits))

    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    # -- algebra ----------------------------------------------------------

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def __neg__(self) -> "PauliString":
        return PauliString(self.n_qubits, self.x_mask, self.z_mask, self.phase_exp + 2)

    def times_i(self, power: int = 1) -> "PauliString":
        return PauliString(self.n_qubits, self.x_mask, self.z_mask, self.phase_exp + power)

    def unsigned(self) -> "PauliString":
        return PauliString(self.n_qubits, self.x_mask, self.z_mask, 0)

    def with_sign(self, sign: int) -> "PauliString":
        return PauliString(self.n_qubits, self.x_mask, self.z_mask, 0 if sign > 0 else 2)

    def commutes(self, other: "PauliString") -> bool:
        return commutes(self, other)

    def embed(self, n_qubits: int, offset: int = 0) -> "PauliString":
        """Same operator placed on qubits ``offset..`` of a larger register."""
        if offset + self.n_qubits > n_qubits:
            raise DimensionError("embedding does not fit")
        return PauliString(n_qubits, self.x_mask << offset, self.z_mask << offset, self.phase_exp)

    @property
    def symplectic(self) -> int:
        """x bits in the low half, z bits in the high half."""
        return self.x_mask | (self.z_mask << self.n_qubits)

    @classmethod
    def from_symplectic(cls, n_qubits: int, vec: int, phase_exp: int = 0) -> "PauliString":
        mask = (1 << n_qubits) - 1
        return cls(n_qubits, vec & mask, vec >> n_qubits, phase_exp)

    def __str__(self) -> str:
        return format_pauli(self)

    def __repr__(self) -> str:
        return f"PauliString({format_pauli(self)!r}, n={self.n_qubits})"


def _check_dims(p: PauliString, q: PauliString) -> None:
    if p.n_qubits != q.n_qubits:
        raise DimensionError(f"size mismatch: {p.n_qubits} vs {q.n_qubits} qubits")


def multiply(p: PauliString, q: PauliString) -> PauliString:
    """Operator product ``p·q`` with exact phase."""
    _check_dims(p, q)
    x = p.x_mask ^ q.x_mask
    z = p.z_mask ^ q.z_mask
    # sigma(x, z) = i^(x.z) X^x Z^z; moving Z^z1 past X^x2 costs (-1)^(z1.x2)
    phase = (
        p.phase_exp
        + q.phase_exp
        + _popcount(p.x_mask & p.z_mask)
        + _popcount(q.x_mask & q.z_mask)
        + 2 * _popcount(p.z_mask & q.x_mask)
        - _popcount(x & z)
    )
    return PauliString(p.n_qubits, x, z, phase)


def product(paulis: Iterable[PauliString], n_qubits: int | None = None) -> PauliString:
    """Ordered product of ``paulis`` (identity if empty; then ``n_qubits`` is needed)."""
    acc = None
    for p in paulis:
        acc = p if acc is None else multiply(acc, p)
    if acc is None:
        if n_qubits is None:
            raise PauliError("empty product needs n_qubits")
        return PauliString.identity(n_qubits)
    return acc


def commutes(p: PauliString, q: PauliString) -> bool:
    _check_dims(p, q)
    return (_popcount(p.x_mask & q.z_mask) + _popcount(p.z_mask & q.x_mask)) % 2 == 0


def parse(text: str, n_qubits: int | None = None) -> PauliString:
    """Parse a signed literal like ``"-Z1Z2"`` (1-based indices).

    Without ``n_qubits`` the register size is the largest index mentioned.
    A bare letter (``"X"``) means qubit 1.
    """
    m = _LITERAL.match(text)
    if not m:
        raise PauliError(f"malformed Pauli literal {text!r}")
    prefix, body = m.groups()
    phase = _PREFIX_PHASE[prefix]
    letters: dict[int, str] = {}
    for letter, index in _TOKEN.findall(body):
        if letter == "I":
            if index:
                raise PauliError(f"identity takes no index in {text!r}")
            continue
        q = int(index) if index else 1
        if q < 1:
            raise PauliError(f"qubit indices are 1-based in {text!r}")
        if q - 1 in letters:
            raise PauliError(f"duplicate qubit index {q} in {text!r}")
        letters[q - 1] = letter
    top = max(letters, default=-1) + 1
    if n_qubits is None:
        n_qubits = max(top, 1)
    elif top > n_qubits:
        raise PauliError(f"index {top} out of range for {n_qubits} qubits in {text!r}")
    return PauliString.from_sparse(n_qubits, letters, phase)


def format_pauli(p: PauliString) -> str:
    body = "".join(f"{p.letter(q)}{q + 1}" for q in p.support)
    return _PHASE_PREFIX[p.phase_exp] + (body or "I")


# ---------------------------------------------------------------------------
# GF(2) linear algebra on symplectic vectors


def _eliminate(vectors: Sequence[int]):
    """Forward elimination; returns [(pivot_bit, reduced_vec, combo_mask)]."""
    basis = []
    for i, v in enumerate(vectors):
        combo = 1 << i
        for pivot, bv, bc in basis:
            if v >> pivot & 1:
                v ^= bv
                combo ^= bc
        if v:
            basis.append((v.bit_length() - 1, v, combo))
    return basis


def gf2_rank(paulis: Sequence[PauliString]) -> int:
    return len(_eliminate([p.symplectic for p in paulis]))


def symplectic_decompose(target: PauliString, generators: Sequence[PauliString]) -> list[int] | None:
    """Indices of ``generators`` whose product equals ``target`` up to phase, or None."""
    basis = _eliminate([g.symplectic for g in generators])
    v = target.symplectic
    combo = 0
    for pivot, bv, bc in basis:
        if v >> pivot & 1:
            v ^= bv
            combo ^= bc
    if v:
        return None
    return [i for i in range(len(generators)) if combo >> i & 1]


def group_sign(target: PauliString, generators: Sequence[PauliString]) -> int | None:
    """Return +1/-1 if ``±target`` lies in the group generated by ``generators``.

    ``target`` must be Hermitian and the generators mutually commuting; the
    return value is the sign ``s`` with ``s·target`` in the group, or None when
    not even the unsigned operator is generated.
    """
    idx = symplectic_decompose(target, generators)
    if idx is None:
        return None
    prod = product((generators[i] for i in idx), target.n_qubits)
    diff = (prod.phase_exp - target.phase_exp) % 4
    if diff % 2:
        raise PauliError("generated element differs from target by a factor of i")
    return 1 if diff == 0 else -1


def canonical_generators(generators: Sequence[PauliString]) -> tuple[PauliString, ...]:
    """Reduced row-echelon generating set of a stabilizer group, with signs.

    Two commuting generating sets yield equal tuples iff they generate the same
    signed group.
    """
    if not generators:
        return ()
    n = generators[0].n_qubits
    rows = list(generators)
    out: list[PauliString] = []
    width = 2 * n
    for bit in reversed(range(width)):
        pick = next((r for r in rows if r.symplectic >> bit & 1), None)
        if pick is None:
            continue
        rows.remove(pick)
        rows = [multiply(pick, r) if r.symplectic >> bit & 1 else r for r in rows]
        out = [multiply(pick, o) if o.symplectic >> bit & 1 else o for o in out]
        out.append(pick)
    return tuple(sorted(out, key=lambda p: -p.symplectic))


def dual_paulis(operators: Sequence[PauliString]) -> list[PauliString]:
    """For independent ``operators`` find partners ``E_i`` with
    ``E_i`` anticommuting with ``operators[i]`` and commuting with the rest.
    """
    if not operators:
        return []
    n = operators[0].n_qubits
    mask = (1 << n) - 1
    # symplectic product <e, O> = e . swap(O)
    rows = [((o.symplectic & mask) << n) | (o.symplectic >> n) for o in operators]
    m = len(rows)
    width = 2 * n
    # augmented Gauss-Jordan: unknown bits 0..width-1, identity block after
    aug = [rows[i] | (1 << (width + i)) for i in range(m)]
    pivots = []
    r = 0
    for col in range(width):
        sel = next((k for k in range(r, m) if aug[k] >> col & 1), None)
        if sel is None:
            continue
        aug[r], aug[sel] = aug[sel], aug[r]
        for k in range(m):
            if k != r and aug[k] >> col & 1:
                aug[k] ^= aug[r]
        pivots.append(col)
        r += 1
    if r < m:
        raise PauliError("operators are not independent")
    solutions = []
    for i in range(m):
        e = 0
        for k, col in enumerate(pivots):
            if aug[k] >> (width + i) & 1:
                e |= 1 << col
        solutions.append(PauliString.from_symplectic(n, e))
    return solutions
