"""Stabilizer codes: the signed 4-qubit surface codes, their merged forms,
planar surface codes, and the 3-qubit repetition code.

All codes here encode one logical qubit.  A code lives inside a register of
``n_qubits`` qubits and acts on the subset ``qubits``; the 4-qubit codes use
an 8-qubit register so that code A sits on qubits 1-4 and code B on 5-8.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .pauli import (
    PauliString,
    dual_paulis,
    format_pauli,
    gf2_rank,
    group_sign,
    multiply,
    parse,
)
from .tableau import StabilizerTableau

__all__ = [
    "CodeError",
    "StabilizerCode",
    "LOGICAL_LABELS",
    "normalize_label",
    "four_qubit_code",
    "code_A",
    "code_B",
    "merged_rough",
    "merged_smooth",
    "planar_surface_code",
    "repetition_code_3",
    "encode",
    "syndromes",
    "distance",
    "code_by_name",
    "MAX_DISTANCE_QUBITS",
]

MAX_DISTANCE_QUBITS = 12


class CodeError(ValueError):
    """Invalid code definition or request."""


@dataclass(frozen=True)
class StabilizerCode:
    n_qubits: int
    generators: tuple[PauliString, ...]
    logical_x: PauliString
    logical_z: PauliString
    label: str
    qubits: tuple[int, ...] = ()
    layout: Mapping | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.qubits:
            object.__setattr__(self, "qubits", tuple(range(self.n_qubits)))
        object.__setattr__(self, "generators", tuple(self.generators))
        self._validate()

    def _validate(self) -> None:
        ops = list(self.generators) + [self.logical_x, self.logical_z]
        for op in ops:
            if op.n_qubits != self.n_qubits:
                raise CodeError(f"{format_pauli(op)} has wrong register size")
        support = 0
        for q in self.qubits:
            support |= 1 << q
        gens = self.generators
        for g in gens:
            if not g.is_hermitian:
                raise CodeError(f"generator {format_pauli(g)} is not Hermitian")
            if g.support_mask & ~support:
                raise CodeError(f"generator {format_pauli(g)} leaves the code qubits")
        for i, g in enumerate(gens):
            for h in gens[i + 1 :]:
                if not g.commutes(h):
                    raise CodeError(f"{format_pauli(g)} and {format_pauli(h)} anticommute")
        if gf2_rank(gens) != len(gens):
            raise CodeError("generators are not independent")
        if len(self.qubits) - len(gens) != 1:
            raise CodeError(f"{len(self.qubits)} qubits and {len(gens)} generators do not encode one qubit")
        for name, op in (("X", self.logical_x), ("Z", self.logical_z)):
            if not all(op.commutes(g) for g in gens):
                raise CodeError(f"logical {name} does not commute with the stabilizers")
            if group_sign(op, gens) is not None:
                raise CodeError(f"logical {name} lies in the stabilizer group")
        if self.logical_x.commutes(self.logical_z):
            raise CodeError("logical X and Z commute")

    @property
    def logical_y(self) -> PauliString:
        """i·X_L·Z_L, the Hermitian logical Y representative."""
        return multiply(self.logical_x, self.logical_z).times_i()

    def logical(self, letter: str) -> PauliString:
        letter = letter.upper()
        if letter == "X":
            return self.logical_x
        if letter == "Z":
            return self.logical_z
        if letter == "Y":
            return self.logical_y
        raise CodeError(f"no logical operator {letter!r}")

    @property
    def n_data(self) -> int:
        return len(self.qubits)

    def stabilizer_sign(self, p: PauliString) -> int | None:
        """+1/-1 if ±p is in the stabilizer group, else None."""
        return group_sign(self._fit(p), self.generators)

    def _fit(self, p: PauliString) -> PauliString:
        if p.n_qubits == self.n_qubits:
            return p
        if p.n_qubits < self.n_qubits:
            return p.embed(self.n_qubits)
        raise CodeError("operator larger than the code register")

    def embed(self, n_qubits: int, offset: int = 0) -> "StabilizerCode":
        """The same code inside a larger register, shifted by ``offset``."""
        if n_qubits == self.n_qubits and offset == 0:
            return self
        return StabilizerCode(
            n_qubits,
            tuple(g.embed(n_qubits, offset) for g in self.generators),
            self.logical_x.embed(n_qubits, offset),
            self.logical_z.embed(n_qubits, offset),
            self.label,
            tuple(q + offset for q in self.qubits),
            self.layout,
        )

    def to_dict(self) -> dict:
        if self.n_data <= MAX_DISTANCE_QUBITS:
            dx, dz = distance(self)
            dist = {"x": dx, "z": dz}
        else:
            dist = None  # beyond the brute-force cap
        doc = {
            "label": self.label,
            "n_qubits": self.n_qubits,
            "qubits": [q + 1 for q in self.qubits],
            "generators": [format_pauli(g) for g in self.generators],
            "logical_x": format_pauli(self.logical_x),
            "logical_z": format_pauli(self.logical_z),
            "logical_y": format_pauli(self.logical_y),
            "distance": dist,
        }
        if self.layout is not None:
            doc["layout"] = dict(self.layout)
        return doc


def _ops(n: int, *texts: str) -> tuple[PauliString, ...]:
    return tuple(parse(t, n) for t in texts)


def _grid_layout(rows: int, cols: int, first: int = 0) -> dict:
    return {
        "rows": rows,
        "cols": cols,
        "vertex_to_qubit": {f"{r},{c}": first + c * rows + r + 1 for c in range(cols) for r in range(rows)},
        "rough_boundaries": "left/right, closed by Z-type stabilizers",
        "smooth_boundaries": "top/bottom, closed by X-type stabilizers",
    }


def four_qubit_code(first: int = 0, n_qubits: int = 8, label: str = "A") -> StabilizerCode:
    """⟨-Z_aZ_b, -Z_cZ_d, +X_aX_bX_cX_d⟩ on qubits ``first..first+3`` (0-based).

    Logical Z is Z_aZ_c and logical X is X_aX_b.
    """
    a, b, c, d = (first + k + 1 for k in range(4))
    gens = _ops(n_qubits, f"-Z{a}Z{b}", f"-Z{c}Z{d}", f"+X{a}X{b}X{c}X{d}")
    return StabilizerCode(
        n_qubits,
        gens,
        parse(f"+X{a}X{b}", n_qubits),
        parse(f"+Z{a}Z{c}", n_qubits),
        label,
        tuple(range(first, first + 4)),
        _grid_layout(2, 2, first),
    )


def code_A(n_qubits: int = 8) -> StabilizerCode:
    return four_qubit_code(0, n_qubits, "A")


def code_B(n_qubits: int = 8) -> StabilizerCode:
    return four_qubit_code(4, n_qubits, "B")


def _signed(text: str, bit: int, n: int) -> PauliString:
    p = parse(text, n)
    return -p if bit else p


def merged_rough(merge_bits: Sequence[int] = (0, 0), n_qubits: int = 8) -> StabilizerCode:
    """Codes A and B fused across their rough boundaries (a 2x4 surface code).

    The merging stabilizers X3X5, X4X6 carry signs (-1)^m, (-1)^m'.
    """
    m, m2 = merge_bits
    gens = _ops(n_qubits, "-Z1Z2", "+X1X2X3X4", "-Z7Z8", "+X5X6X7X8", "+Z3Z4Z5Z6") + (
        _signed("X3X5", m, n_qubits),
        _signed("X4X6", m2, n_qubits),
    )
    return StabilizerCode(
        n_qubits,
        gens,
        parse("+X1X2", n_qubits),
        parse("+Z1Z3Z5Z7", n_qubits),
        "merged-rough",
        tuple(range(8)),
        _grid_layout(2, 4),
    )


def merged_smooth(merge_bits: Sequence[int] = (0,), n_qubits: int = 8) -> StabilizerCode:
    """Codes A and B fused across their smooth boundaries (a 4x2 surface code)."""
    (m,) = merge_bits
    gens = code_A(n_qubits).generators + code_B(n_qubits).generators + (_signed("Z2Z4Z5Z7", m, n_qubits),)
    return StabilizerCode(
        n_qubits,
        gens,
        parse("+X1X2X5X6", n_qubits),
        parse("+Z1Z3", n_qubits),
        "merged-smooth",
        tuple(range(8)),
        {
            "rows": 4,
            "cols": 2,
            "vertex_to_qubit": {"0,0": 1, "1,0": 2, "0,1": 3, "1,1": 4, "2,0": 5, "3,0": 6, "2,1": 7, "3,1": 8},
            "smooth_boundary_joined": "bottom of A (qubits 2,4) to top of B (qubits 5,7)",
        },
    )


def planar_surface_code(rows: int, cols: int) -> StabilizerCode:
    """Unrotated-vertex planar code on a rows x cols grid of qubits.

    Vertex (r, c) is qubit ``c*rows + r`` (column-major, so a 2x2 grid numbers
    its left column 1, 2 and right column 3, 4).  Face (r, c) is X-type when
    r + c is even.  Two-body Z checks close the left/right edges beside
    X-type faces; two-body X checks close the top/bottom edges beside Z-type
    faces.  Logical Z runs along the top row, logical X down the left column.
    """
    if rows < 2 or cols < 2:
        raise CodeError("planar codes need at least a 2x2 grid")
    n = rows * cols
    if n > 64:
        raise CodeError("grid too large")

    def q(r, c):
        return c * rows + r

    def op(letter, cells):
        return PauliString.from_sparse(n, {q(r, c): letter for r, c in cells})

    gens = []
    for c in range(cols - 1):
        for r in range(rows - 1):
            letter = "X" if (r + c) % 2 == 0 else "Z"
            gens.append(op(letter, [(r, c), (r + 1, c), (r, c + 1), (r + 1, c + 1)]))
    for r in range(rows - 1):
        if r % 2 == 0:  # face (r, 0) is X-type
            gens.append(op("Z", [(r, 0), (r + 1, 0)]))
        if (r + cols - 2) % 2 == 0:
            gens.append(op("Z", [(r, cols - 1), (r + 1, cols - 1)]))
    for c in range(cols - 1):
        if c % 2 == 1:  # face (0, c) is Z-type
            gens.append(op("X", [(0, c), (0, c + 1)]))
        if (rows - 2 + c) % 2 == 1:
            gens.append(op("X", [(rows - 1, c), (rows - 1, c + 1)]))
    return StabilizerCode(
        n,
        tuple(gens),
        op("X", [(r, 0) for r in range(rows)]),
        op("Z", [(0, c) for c in range(cols)]),
        f"sc{rows}x{cols}",
        tuple(range(n)),
        _grid_layout(rows, cols),
    )


def repetition_code_3() -> StabilizerCode:
    """Bit-flip code ⟨Z1Z2, Z2Z3⟩ with Z_L = Z1 and X_L = X1X2X3."""
    return StabilizerCode(3, _ops(3, "+Z1Z2", "+Z2Z3"), parse("+X1X2X3"), parse("+Z1", 3), "rep3")


# ---------------------------------------------------------------------------
# logical states

# label -> (logical letter, sign)
LOGICAL_LABELS = {"0": ("Z", 1), "1": ("Z", -1), "+": ("X", 1), "-": ("X", -1), "+i": ("Y", 1), "-i": ("Y", -1)}


def normalize_label(label: str) -> str:
    text = str(label).strip().replace("−", "-")
    if text == "i":
        text = "+i"
    if text not in LOGICAL_LABELS:
        raise CodeError(f"unknown logical label {label!r}; expected one of {sorted(LOGICAL_LABELS)}")
    return text


def label_operator(code: StabilizerCode, label: str) -> PauliString:
    """The signed logical operator stabilizing the labeled state."""
    letter, sign = LOGICAL_LABELS[normalize_label(label)]
    op = code.logical(letter)
    return op if sign > 0 else -op


MeasureFn = Callable[[StabilizerTableau, PauliString], int]


def encode(
    state: StabilizerTableau,
    code: StabilizerCode,
    label: str,
    rng=None,
    measure: MeasureFn | None = None,
) -> None:
    """Prepare the labeled logical state by measuring and fixing.

    Each signed generator, then the labeled logical operator, is measured; a
    -1 outcome is flipped by applying a Pauli partner that anticommutes with
    that operator only.  Without ``rng`` or ``measure`` random outcomes are
    projected onto +1 directly.  ``measure`` substitutes a (possibly noisy)
    measurement routine returning the outcome bit.
    """
    code = code.embed(state.n_qubits) if code.n_qubits < state.n_qubits else code
    targets = list(code.generators) + [label_operator(code, label)]
    partners = dual_paulis(targets)
    for op, fix in zip(targets, partners):
        if measure is not None:
            bit = measure(state, op)
        elif rng is None:
            e = state.expectation(op)
            bit = 0 if e >= 0 else 1
            if e == 0:
                state.measure(op, forced=0)
        else:
            bit = state.measure(op, rng).bit
        if bit:
            state.apply_pauli(fix)


def syndromes(state: StabilizerTableau, code: StabilizerCode) -> list[int]:
    """Expectation of each signed generator: +1, -1, or 0 when indefinite."""
    code = code.embed(state.n_qubits) if code.n_qubits < state.n_qubits else code
    return [state.expectation(g) for g in code.generators]


def distance(code: StabilizerCode) -> tuple[int, int]:
    """(d_x, d_z): minimum weights over the cosets X_L·S and Z_L·S.

    Brute force over all 2^|generators| stabilizer elements in Gray-code order.
    """
    if code.n_data > MAX_DISTANCE_QUBITS:
        raise CodeError(f"distance enumeration capped at {MAX_DISTANCE_QUBITS} qubits")
    gens = [(g.x_mask, g.z_mask) for g in code.generators]
    best = []
    for logical in (code.logical_x, code.logical_z):
        x, z = logical.x_mask, logical.z_mask
        w = (x | z).bit_count()
        for k in range(1, 1 << len(gens)):
            gx, gz = gens[(k & -k).bit_length() - 1]
            x ^= gx
            z ^= gz
            w = min(w, (x | z).bit_count())
        best.append(w)
    return best[0], best[1]


_GRID_NAME = re.compile(r"^sc(\d+)x(\d+)$")


def code_by_name(name: str) -> StabilizerCode:
    """Codes addressable from the command line."""
    key = name.strip().lower()
    if key in ("sc2x2a", "code_a", "a"):
        return code_A()
    if key in ("sc2x2b", "code_b", "b"):
        return code_B()
    if key == "rep3":
        return repetition_code_3()
    if key in ("merged-rough", "merged_rough"):
        return merged_rough()
    if key in ("merged-smooth", "merged_smooth"):
        return merged_smooth()
    m = _GRID_NAME.match(key)
    if m:
        return planar_surface_code(int(m.group(1)), int(m.group(2)))
    raise CodeError(f"unknown code {name!r}")
