"""Dense statevector simulation for small qubit registers.

Amplitudes are indexed big-endian: qubit 0 is the leftmost symbol of the ket,
so ``|ABC>`` with A=1, B=0, C=1 lives at index 0b101 = 5.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

MAX_QUBITS = 16
NORM_TOL = 1e-10
UNITARY_TOL = 1e-12

_SQRT1_2 = 1.0 / np.sqrt(2.0)

GATES: dict[str, np.ndarray] = {
    "I": np.array([[1, 0], [0, 1]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT1_2,
}


class Basis(str, Enum):
    Z = "Z"
    X = "X"


class RegisterSizeError(ValueError):
    """Register would exceed the supported dense size."""


@dataclass(frozen=True, eq=False)
class StateVector:
    num_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise RegisterSizeError(
                f"register size {self.num_qubits} outside [1, {MAX_QUBITS}]"
            )
        if self.amps.shape != (1 << self.num_qubits,):
            raise ValueError(
                f"expected {1 << self.num_qubits} amplitudes, got {self.amps.shape}"
            )
        if not np.all(np.isfinite(self.amps)):
            raise ValueError("amplitudes must be finite")

    @classmethod
    def from_amplitudes(cls, amps, normalize: bool = False) -> "StateVector":
        a = np.asarray(amps, dtype=complex).ravel()
        n = a.size.bit_length() - 1
        if a.size != 1 << n:
            raise ValueError(f"amplitude count {a.size} is not a power of two")
        if normalize:
            a = a / np.linalg.norm(a)
        return cls(n, a)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    @classmethod
    def _trusted(cls, n: int, amps: np.ndarray) -> "StateVector":
        # skips validation; only for results of norm-preserving internal ops
        s = object.__new__(cls)
        object.__setattr__(s, "num_qubits", n)
        object.__setattr__(s, "amps", amps)
        return s

    def _tensor_view(self) -> np.ndarray:
        return self.amps.reshape((2,) * self.num_qubits)

    def _split(self, q: int) -> np.ndarray:
        """View as (left, 2, right) around qubit ``q``."""
        return self.amps.reshape(1 << q, 2, 1 << (self.num_qubits - q - 1))

    def __repr__(self):
        terms = [
            f"({a:.4g})|{i:0{self.num_qubits}b}>"
            for i, a in enumerate(self.amps)
            if abs(a) > 1e-12
        ]
        return " + ".join(terms) or "0"


def _check_qubit(s: StateVector, q: int) -> None:
    if not 0 <= q < s.num_qubits:
        raise IndexError(f"qubit {q} out of range for {s.num_qubits}-qubit register")


def new_basis_state(n: int, bits: str | None = None) -> StateVector:
    """Computational basis state ``|bits>`` on ``n`` qubits (all zeros by default)."""
    if not 1 <= n <= MAX_QUBITS:
        raise RegisterSizeError(f"register size {n} outside [1, {MAX_QUBITS}]")
    bits = "0" * n if bits is None else bits
    if len(bits) != n or set(bits) - {"0", "1"}:
        raise ValueError(f"bad basis label {bits!r} for {n} qubits")
    amps = np.zeros(1 << n, dtype=complex)
    amps[int(bits, 2)] = 1.0
    return StateVector(n, amps)


_SINGLE = {
    (Basis.Z, 0): np.array([1, 0], dtype=complex),
    (Basis.Z, 1): np.array([0, 1], dtype=complex),
    (Basis.X, 0): np.array([_SQRT1_2, _SQRT1_2], dtype=complex),
    (Basis.X, 1): np.array([_SQRT1_2, -_SQRT1_2], dtype=complex),
}


def single_qubit(basis: Basis | str, bit: int) -> StateVector:
    """One of |0>, |1> (Z basis) or |+>, |-> (X basis)."""
    # amplitude arrays are never mutated in place, so sharing them is safe
    return StateVector._trusted(1, _SINGLE[(Basis(basis), int(bit))])


def apply_gate1(s: StateVector, g: str, q: int) -> StateVector:
    _check_qubit(s, q)
    u = GATES[g]
    v = s._split(q)
    out = np.empty_like(v)
    out[:, 0, :] = u[0, 0] * v[:, 0, :] + u[0, 1] * v[:, 1, :]
    out[:, 1, :] = u[1, 0] * v[:, 0, :] + u[1, 1] * v[:, 1, :]
    return StateVector._trusted(s.num_qubits, out.reshape(-1))


def apply_cnot(s: StateVector, control: int, target: int) -> StateVector:
    _check_qubit(s, control)
    _check_qubit(s, target)
    if control == target:
        raise ValueError("CNOT control and target must differ")
    t = s._tensor_view().copy()
    sel = [slice(None)] * s.num_qubits
    sel[control] = 1
    sub = t[tuple(sel)]
    # target axis index shifts down by one once the control axis is removed
    axis = target - (1 if target > control else 0)
    t[tuple(sel)] = np.flip(sub, axis=axis)
    return StateVector._trusted(s.num_qubits, t.reshape(-1))


def tensor(a: StateVector, b: StateVector) -> StateVector:
    n = a.num_qubits + b.num_qubits
    if n > MAX_QUBITS:
        raise RegisterSizeError(f"tensor product would hold {n} qubits")
    return StateVector._trusted(n, np.kron(a.amps, b.amps))


def qubit_probability_one(s: StateVector, q: int) -> float:
    _check_qubit(s, q)
    b = s._split(q)[:, 1, :]
    return float(np.vdot(b, b).real)


def _sample_z(s: StateVector, q: int, rng: np.random.Generator) -> tuple[int, np.ndarray]:
    """Born-rule sample of qubit ``q``; returns the bit and the normalized (left, right) branch."""
    v = s._split(q)
    b1 = v[:, 1, :]
    p1 = float(np.vdot(b1, b1).real)
    bit = int(rng.random() < p1)
    p = p1 if bit else 1.0 - p1
    return bit, v[:, bit, :] / np.sqrt(p)


def measure_qubit(
    s: StateVector, q: int, basis: Basis | str, rng: np.random.Generator
) -> tuple[int, StateVector]:
    """Projective measurement of qubit ``q``.

    Returns the outcome and the renormalized post-measurement state on the full
    register. X-basis outcome 0 means ``|+>``, 1 means ``|->``; the measured qubit
    is left in that eigenstate.
    """
    _check_qubit(s, q)
    x_basis = Basis(basis) is Basis.X
    if x_basis:
        s = apply_gate1(s, "H", q)
    bit, branch = _sample_z(s, q, rng)
    full = np.zeros((branch.shape[0], 2, branch.shape[1]), dtype=complex)
    full[:, bit, :] = branch
    out = StateVector._trusted(s.num_qubits, full.reshape(-1))
    if x_basis:
        out = apply_gate1(out, "H", q)
    return bit, out


def measure_and_discard(
    s: StateVector, q: int, basis: Basis | str, rng: np.random.Generator
) -> tuple[int, StateVector | None]:
    """Measure qubit ``q`` and drop it, returning the remaining register.

    The remainder is ``None`` when ``q`` was the only qubit.
    """
    _check_qubit(s, q)
    if Basis(basis) is Basis.X:
        s = apply_gate1(s, "H", q)
    bit, branch = _sample_z(s, q, rng)
    if s.num_qubits == 1:
        return bit, None
    return bit, StateVector._trusted(s.num_qubits - 1, branch.reshape(-1))


def measure_all(s: StateVector, rng: np.random.Generator) -> str:
    """Z-measure every qubit in order and return the collapsed label."""
    bits = []
    for q in range(s.num_qubits):
        bit, s = measure_qubit(s, q, Basis.Z, rng)
        bits.append(str(bit))
    return "".join(bits)


def overlap(a: StateVector, b: StateVector) -> float:
    """``|<a|b>|``, the phase-blind comparison used for state equality."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("registers differ in size")
    return float(abs(np.vdot(a.amps, b.amps)))


def same_state(a: StateVector, b: StateVector, tol: float = NORM_TOL) -> bool:
    return abs(overlap(a, b) - 1.0) <= tol


def permute(s: StateVector, order: list[int]) -> StateVector:
    """Reorder qubits so that new qubit ``i`` is old qubit ``order[i]``."""
    if sorted(order) != list(range(s.num_qubits)):
        raise ValueError(f"{order} is not a permutation of the register")
    t = np.transpose(s._tensor_view(), order)
    return StateVector(s.num_qubits, np.ascontiguousarray(t).reshape(-1))


class QubitPool:
    """A set of independent registers addressed by stable qubit handles.

    Two-qubit gates across registers merge them with a tensor product; measured
    qubits are removed from their register. Product structure is therefore kept
    as long as nothing entangles it, which keeps each dense register small.
    """

    def __init__(self, rng: np.random.Generator, max_qubits: int = MAX_QUBITS):
        self.rng = rng
        self.max_qubits = max_qubits
        self._regs: dict[int, tuple[StateVector, list[int]]] = {}
        self._where: dict[int, int] = {}
        self._next_handle = 0
        self._next_reg = 0

    def __contains__(self, handle: int) -> bool:
        return handle in self._where

    def __len__(self) -> int:
        return len(self._where)

    def add(self, state: StateVector) -> list[int]:
        handles = list(range(self._next_handle, self._next_handle + state.num_qubits))
        self._next_handle += state.num_qubits
        rid = self._next_reg
        self._next_reg += 1
        self._regs[rid] = (state, handles)
        for h in handles:
            self._where[h] = rid
        return handles

    def register_size(self, handle: int) -> int:
        return self._regs[self._where[handle]][0].num_qubits

    def _locate(self, handle: int) -> tuple[int, int]:
        try:
            rid = self._where[handle]
        except KeyError:
            raise KeyError(f"qubit handle {handle} is not live") from None
        return rid, self._regs[rid][1].index(handle)

    def _merge(self, ra: int, rb: int) -> int:
        sa, ha = self._regs[ra]
        sb, hb = self._regs.pop(rb)
        if sa.num_qubits + sb.num_qubits > self.max_qubits:
            raise RegisterSizeError(
                f"entangling registers of {sa.num_qubits} and {sb.num_qubits} qubits "
                f"exceeds the {self.max_qubits}-qubit limit"
            )
        self._regs[ra] = (tensor(sa, sb), ha + hb)
        for h in hb:
            self._where[h] = ra
        return ra

    def gate(self, handle: int, g: str) -> None:
        rid, q = self._locate(handle)
        s, hs = self._regs[rid]
        self._regs[rid] = (apply_gate1(s, g, q), hs)

    def cnot(self, control: int, target: int) -> None:
        rc, _ = self._locate(control)
        rt, _ = self._locate(target)
        if rc != rt:
            self._merge(rc, rt)
        rid, qc = self._locate(control)
        _, qt = self._locate(target)
        s, hs = self._regs[rid]
        self._regs[rid] = (apply_cnot(s, qc, qt), hs)

    def measure(self, handle: int, basis: Basis | str = Basis.Z) -> int:
        """Measure and consume a qubit."""
        rid, q = self._locate(handle)
        s, hs = self._regs[rid]
        bit, rest = measure_and_discard(s, q, basis, self.rng)
        del self._where[handle]
        if rest is None:
            del self._regs[rid]
        else:
            self._regs[rid] = (rest, hs[:q] + hs[q + 1:])
        return bit

    def state_of(self, handles: list[int]) -> StateVector:
        """Joint state of ``handles`` in the given order.

        The handles must cover whole registers (nothing else may be entangled
        with them).
        """
        rids: list[int] = []
        for h in handles:
            rid, _ = self._locate(h)
            if rid not in rids:
                rids.append(rid)
        covered = [h for rid in rids for h in self._regs[rid][1]]
        if sorted(covered) != sorted(handles):
            raise ValueError("handles do not cover their registers exactly")
        state = self._regs[rids[0]][0]
        for rid in rids[1:]:
            state = tensor(state, self._regs[rid][0])
        return permute(state, [covered.index(h) for h in handles])
