"""Bell/GHZ state preparation, entangled measurement and the GHZ label algebra.

A GHZ label ``b1 b2 ... bN`` names the state

    (|0 b2...bN> + (-1)**b1 |1 ~b2...~bN>) / sqrt(2)

so ``b1`` is the sign bit and the remaining bits are the pattern. For N = 2 the
labels coincide with the Bell basis: 00 = Phi+, 01 = Psi+, 10 = Phi-, 11 = Psi-.
"""
from __future__ import annotations

from enum import Enum
from typing import Sequence

import numpy as np

from .qsim import (
    Basis,
    StateVector,
    apply_cnot,
    apply_gate1,
    measure_qubit,
)

_SQRT1_2 = 1.0 / np.sqrt(2.0)


class EncodingOp(str, Enum):
    I = "I"
    X = "X"
    Y = "Y"
    Z = "Z"

    @property
    def x(self) -> int:
        """1 if the op carries a bit flip (X or Y)."""
        return int(self in (EncodingOp.X, EncodingOp.Y))

    @property
    def z(self) -> int:
        """1 if the op carries a phase flip (Z or Y)."""
        return int(self in (EncodingOp.Z, EncodingOp.Y))

    @classmethod
    def from_components(cls, x: int, z: int) -> "EncodingOp":
        return {(0, 0): cls.I, (1, 0): cls.X, (0, 1): cls.Z, (1, 1): cls.Y}[(x, z)]


class BellLabel(Enum):
    PHI_PLUS = "00"
    PSI_PLUS = "01"
    PHI_MINUS = "10"
    PSI_MINUS = "11"

    @property
    def bits(self) -> str:
        return self.value

    @property
    def symbol(self) -> str:
        return {"00": "Φ+", "01": "Ψ+", "10": "Φ-", "11": "Ψ-"}[self.value]

    @classmethod
    def from_bits(cls, bits: str) -> "BellLabel":
        return cls(bits)


def _check_label(label: str, n: int | None = None) -> None:
    if len(label) < 2 or set(label) - {"0", "1"}:
        raise ValueError(f"GHZ label must be a bitstring of length >= 2, got {label!r}")
    if n is not None and len(label) != n:
        raise ValueError(f"label {label!r} does not have length {n}")


def flip(bit: str) -> str:
    return "1" if bit == "0" else "0"


def prepare_ghz(n: int, label: str) -> StateVector:
    _check_label(label, n)
    pattern = label[1:]
    first = int("0" + pattern, 2)
    second = int("1" + "".join(flip(b) for b in pattern), 2)
    sign = -1.0 if label[0] == "1" else 1.0
    amps = np.zeros(1 << n, dtype=complex)
    amps[first] = _SQRT1_2
    amps[second] = sign * _SQRT1_2
    return StateVector(n, amps)


def prepare_bell(label: BellLabel | str) -> StateVector:
    bits = label.bits if isinstance(label, BellLabel) else BellLabel.from_bits(label).bits
    return prepare_ghz(2, bits)


def ghz_measure(s: StateVector, qubits: Sequence[int], rng: np.random.Generator) -> str:
    """Disentangle with CNOTs from the first listed qubit, H on it, then read out.

    Returns the GHZ label of the listed qubits. The input value is not modified.
    """
    qubits = list(qubits)
    if len(qubits) < 2 or len(set(qubits)) != len(qubits):
        raise ValueError(f"GHZ measurement needs >= 2 distinct qubits, got {qubits}")
    head = qubits[0]
    for q in reversed(qubits[1:]):
        s = apply_cnot(s, head, q)
    s = apply_gate1(s, "H", head)
    bits = []
    for q in qubits:
        bit, s = measure_qubit(s, q, Basis.Z, rng)
        bits.append(str(bit))
    return "".join(bits)


def bell_measure(s: StateVector, qa: int, qb: int, rng: np.random.Generator) -> BellLabel:
    return BellLabel.from_bits(ghz_measure(s, [qa, qb], rng))


def apply_ops(s: StateVector, ops: Sequence[EncodingOp | str]) -> StateVector:
    """Apply ``ops[k]`` to qubit ``k``."""
    for k, op in enumerate(ops):
        op = EncodingOp(op)
        if op is not EncodingOp.I:
            s = apply_gate1(s, op.value, k)
    return s


def label_after_ops(
    initial: str, ops: Sequence[EncodingOp | str], leader_pos: int = 0
) -> str:
    """Classical update of a GHZ label under one Pauli per position.

    A phase flip anywhere toggles the sign bit. A bit flip on position 0 toggles
    every pattern bit, elsewhere it toggles only that position. Only the leader
    (``leader_pos``) may use Y or Z; global phases are dropped.
    """
    _check_label(initial)
    ops = [EncodingOp(o) for o in ops]
    if len(ops) != len(initial):
        raise ValueError(f"{len(ops)} ops for a {len(initial)}-qubit label")
    bits = list(initial)
    for k, op in enumerate(ops):
        if op.z and k != leader_pos:
            raise ValueError(f"follower at position {k} may only use I or X, got {op.value}")
        if op.z:
            bits[0] = flip(bits[0])
        if op.x:
            if k == 0:
                bits[1:] = [flip(b) for b in bits[1:]]
            else:
                bits[k] = flip(bits[k])
    return "".join(bits)


def ghz_basis(n: int) -> list[str]:
    return [format(i, f"0{n}b") for i in range(1 << n)]
