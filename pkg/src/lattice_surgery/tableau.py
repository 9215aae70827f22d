"""Stabilizer-state simulator (Aaronson-Gottesman tableau).

The tableau is stored column-wise: ``_x[q]`` and ``_z[q]`` are integers whose
bit ``i`` is the X/Z component of row ``i`` on qubit ``q``.  Rows ``0..n-1``
are destabilizers, rows ``n..2n-1`` stabilizers, and ``_r`` packs the sign bit
of every row.  Clifford gates then touch a constant number of integers, and a
measurement costs O(n) word operations.
"""

from __future__ import annotations

from typing import NamedTuple, Protocol

from .pauli import PauliError, PauliString, format_pauli, gf2_rank

__all__ = [
    "ImpossibleOutcomeError",
    "MeasurementOutcome",
    "StabilizerTableau",
    "init_zero",
]


class ImpossibleOutcomeError(RuntimeError):
    """A forced measurement outcome has zero probability."""


class RandomBits(Protocol):
    def getrandbits(self, k: int) -> int: ...


class MeasurementOutcome(NamedTuple):
    bit: int
    deterministic: bool


_GATES_1Q = {"H", "S", "SDG", "X", "Y", "Z", "I"}
_GATES_2Q = {"CNOT", "CX", "CZ"}


class StabilizerTableau:
    __slots__ = ("n_qubits", "_x", "_z", "_r")

    def __init__(self, n_qubits: int):
        if n_qubits < 1:
            raise ValueError("a tableau needs at least one qubit")
        n = n_qubits
        self.n_qubits = n
        self._x = [1 << q for q in range(n)]
        self._z = [1 << (n + q) for q in range(n)]
        self._r = 0

    def copy(self) -> "StabilizerTableau":
        new = StabilizerTableau.__new__(StabilizerTableau)
        new.n_qubits = self.n_qubits
        new._x = self._x[:]
        new._z = self._z[:]
        new._r = self._r
        return new

    # -- gates ------------------------------------------------------------

    def _check(self, *qubits: int) -> None:
        for q in qubits:
            if not 0 <= q < self.n_qubits:
                raise IndexError(f"qubit {q} out of range for {self.n_qubits} qubits")
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"repeated target in {qubits}")

    def h(self, q: int) -> None:
        self._check(q)
        x, z = self._x[q], self._z[q]
        self._r ^= x & z
        self._x[q], self._z[q] = z, x

    def s(self, q: int) -> None:
        self._check(q)
        x, z = self._x[q], self._z[q]
        self._r ^= x & z
        self._z[q] = z ^ x

    def sdg(self, q: int) -> None:
        self._check(q)
        x, z = self._x[q], self._z[q]
        self._r ^= x & ~z
        self._z[q] = z ^ x

    def x(self, q: int) -> None:
        self._check(q)
        self._r ^= self._z[q]

    def y(self, q: int) -> None:
        self._check(q)
        self._r ^= self._x[q] ^ self._z[q]

    def z(self, q: int) -> None:
        self._check(q)
        self._r ^= self._x[q]

    def cnot(self, control: int, target: int) -> None:
        self._check(control, target)
        xa, za = self._x[control], self._z[control]
        xb, zb = self._x[target], self._z[target]
        self._r ^= xa & zb & ~(xb ^ za)
        self._x[target] = xb ^ xa
        self._z[control] = za ^ zb

    def cz(self, a: int, b: int) -> None:
        self._check(a, b)
        xa, za = self._x[a], self._z[a]
        xb, zb = self._x[b], self._z[b]
        self._r ^= xa & xb & (za ^ zb)
        self._z[a] = za ^ xb
        self._z[b] = zb ^ xa

    def apply_gate(self, gate: str, *targets: int) -> None:
        name = gate.upper()
        if name in _GATES_1Q and len(targets) == 1:
            if name != "I":
                getattr(self, name.lower())(targets[0])
        elif name in _GATES_2Q and len(targets) == 2:
            if name == "CZ":
                self.cz(*targets)
            else:
                self.cnot(*targets)
        else:
            raise ValueError(f"unsupported gate {gate!r} on targets {targets}")

    def apply_pauli(self, p: PauliString) -> None:
        """Conjugate the state by a Pauli operator (global phase dropped)."""
        self._require_size(p)
        self._r ^= self._anticommuting_rows(p)

    # -- queries ----------------------------------------------------------

    def _require_size(self, p: PauliString) -> None:
        if p.n_qubits != self.n_qubits:
            raise PauliError(f"operator on {p.n_qubits} qubits, state has {self.n_qubits}")

    def _anticommuting_rows(self, p: PauliString) -> int:
        anti = 0
        xs, zs = self._x, self._z
        px, pz = p.x_mask, p.z_mask
        m = px | pz
        while m:
            low = m & -m
            q = low.bit_length() - 1
            if px & low:
                anti ^= zs[q]
            if pz & low:
                anti ^= xs[q]
            m ^= low
        return anti

    def _row(self, i: int) -> tuple[int, int, int]:
        x = z = 0
        for q in range(self.n_qubits):
            x |= (self._x[q] >> i & 1) << q
            z |= (self._z[q] >> i & 1) << q
        return x, z, self._r >> i & 1

    def _row_pauli(self, i: int) -> PauliString:
        x, z, r = self._row(i)
        return PauliString(self.n_qubits, x, z, 2 * r)

    def _product_phase(self, destab_rows: int) -> int:
        """Phase exponent of the ordered product of paired stabilizer rows.

        Each factor is written i^(xz) X^x Z^z; moving every X left past the
        Z's of earlier factors costs (-1) per crossing, counted per qubit with
        a prefix parity over the row bits.  The result is relative to the
        Hermitian form of the product, so it is 0 or 2 mod 4.
        """
        n = self.n_qubits
        rows = destab_rows << n
        total = 2 * (self._r & rows).bit_count()
        width = 2 * n
        for xq, zq in zip(self._x, self._z):
            x = xq & rows
            z = zq & rows
            prefix = z
            shift = 1
            while shift < width:
                prefix ^= prefix << shift
                shift <<= 1
            crossings = (x & (prefix << 1)).bit_count()
            total += (x & z).bit_count() + 2 * crossings
            if x.bit_count() & 1 and z.bit_count() & 1:
                total -= 1
        return total & 3

    def _stab_mask(self) -> int:
        n = self.n_qubits
        return ((1 << n) - 1) << n

    def expectation(self, p: PauliString) -> int:
        """+1/-1 if ±p stabilizes the state, else 0."""
        self._require_size(p)
        if not p.is_hermitian:
            raise PauliError(f"{p} is not Hermitian")
        anti = self._anticommuting_rows(p)
        if anti & self._stab_mask():
            return 0
        phase = self._product_phase(anti & ((1 << self.n_qubits) - 1))
        return 1 if phase == p.phase_exp else -1

    def is_deterministic(self, p: PauliString) -> bool:
        self._require_size(p)
        return not (self._anticommuting_rows(p) & self._stab_mask())

    # -- measurement ------------------------------------------------------

    def measure(
        self,
        p: PauliString,
        rng: RandomBits | None = None,
        *,
        forced: int | None = None,
    ) -> MeasurementOutcome:
        """Projectively measure Hermitian ``p``; eigenvalue is ``(-1)**bit``.

        A random outcome is drawn from ``rng`` unless ``forced`` selects the
        branch.  Forcing a deterministic outcome to the wrong value raises
        :class:`ImpossibleOutcomeError`.
        """
        self._require_size(p)
        if not p.is_hermitian:
            raise PauliError(f"cannot measure non-Hermitian {format_pauli(p)}")
        n = self.n_qubits
        anti = self._anticommuting_rows(p)
        stab_anti = anti & self._stab_mask()

        if not stab_anti:
            bit = 0 if self._product_phase(anti & ((1 << n) - 1)) == p.phase_exp else 1
            if forced is not None and forced != bit:
                raise ImpossibleOutcomeError(
                    f"{format_pauli(p)} is deterministic with outcome {bit}, cannot force {forced}"
                )
            return MeasurementOutcome(bit, True)

        if forced is not None:
            bit = forced & 1
        elif rng is None:
            raise ValueError("random measurement outcome needs an rng or a forced bit")
        else:
            bit = rng.getrandbits(1)

        row = (stab_anti & -stab_anti).bit_length() - 1
        others = anti & ~(1 << row)
        rx, rz, rsign = self._row(row)
        xs, zs = self._x, self._z

        # others <- row * others, phase tracked bit-sliced mod 4 in (c0, c1)
        c0 = c1 = 0
        m = rx | rz
        while m:
            low = m & -m
            q = low.bit_length() - 1
            xq, zq = xs[q], zs[q]
            if rx & low and not rz & low:  # X·Y = iZ, X·Z = -iY
                plus, minus = zq & xq, zq & ~xq
            elif rz & low and not rx & low:  # Z·X = iY, Z·Y = -iX
                plus, minus = xq & ~zq, xq & zq
            else:  # Y·Z = iX, Y·X = -iZ
                plus, minus = zq & ~xq, xq & ~zq
            plus &= others
            minus &= others
            carry = c0 & plus
            c0 ^= plus
            c1 ^= carry
            carry = c0 & minus
            c0 ^= minus
            c1 ^= carry ^ minus
            if rx & low:
                xs[q] = xq ^ others
            if rz & low:
                zs[q] = zq ^ others
            m ^= low
        self._r ^= c1 ^ (others if rsign else 0)

        # destabilizer partner <- old row; row <- (-1)^bit p
        dbit = 1 << (row - n)
        pbit = 1 << row
        clear = ~(dbit | pbit)
        px, pz = p.x_mask, p.z_mask
        for q in range(n):
            xv = xs[q] & clear
            zv = zs[q] & clear
            if rx >> q & 1:
                xv |= dbit
            if rz >> q & 1:
                zv |= dbit
            if px >> q & 1:
                xv |= pbit
            if pz >> q & 1:
                zv |= pbit
            xs[q] = xv
            zs[q] = zv
        sign_bit = bit ^ (p.phase_exp == 2)
        r = self._r & clear
        if rsign:
            r |= dbit
        if sign_bit:
            r |= pbit
        self._r = r
        return MeasurementOutcome(bit, False)

    def reset(self, q: int, rng: RandomBits | None = None) -> None:
        """Return qubit ``q`` to |0>; a random collapse draws from ``rng``."""
        zq = PauliString.single(self.n_qubits, q, "Z")
        if self.measure(zq, rng).bit:
            self.x(q)

    # -- inspection -------------------------------------------------------

    @property
    def stab_gens(self) -> list[PauliString]:
        n = self.n_qubits
        return [self._row_pauli(n + i) for i in range(n)]

    @property
    def destab_gens(self) -> list[PauliString]:
        return [self._row_pauli(i) for i in range(self.n_qubits)]

    def validate(self) -> None:
        """Raise AssertionError unless the tableau invariants hold."""
        stabs, destabs = self.stab_gens, self.destab_gens
        n = self.n_qubits
        for i in range(n):
            for j in range(n):
                assert stabs[i].commutes(stabs[j]), f"stabilizers {i},{j} anticommute"
                if i != j:
                    assert destabs[i].commutes(destabs[j]), f"destabilizers {i},{j} anticommute"
                    assert destabs[i].commutes(stabs[j]), f"destab {i} anticommutes with stab {j}"
            assert not destabs[i].commutes(stabs[i]), f"pair {i} commutes"
        assert gf2_rank(stabs + destabs) == 2 * n, "generators not independent"

    def dump(self) -> str:
        lines = [f"# {self.n_qubits}-qubit stabilizer state"]
        lines += [f"S{i + 1}: {format_pauli(p)}" for i, p in enumerate(self.stab_gens)]
        lines += [f"D{i + 1}: {format_pauli(p)}" for i, p in enumerate(self.destab_gens)]
        return "\n".join(lines)

    def __repr__(self) -> str:
        gens = ", ".join(format_pauli(p) for p in self.stab_gens)
        return f"StabilizerTableau(<{gens}>)"


def init_zero(n_qubits: int) -> StabilizerTableau:
    """|0...0> on ``n_qubits`` qubits."""
    return StabilizerTableau(n_qubits)
