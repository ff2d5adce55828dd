"""Embedded verification battery: every check runs the full statevector path."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .adversary import CNOT_SCENARIO_FINAL, cnot_attack_scenario
from .entangle import (
    BellLabel,
    EncodingOp,
    apply_ops,
    bell_measure,
    ghz_basis,
    ghz_measure,
    label_after_ops,
    prepare_bell,
    prepare_ghz,
)
from .protocol import extract_key_follower, extract_key_leader, leader_bit

E = EncodingOp

# (leader op, follower op) -> (published Bell state, key bit), starting from Phi+
TABLE_I: dict[tuple[EncodingOp, EncodingOp], tuple[BellLabel, int]] = {
    (E.I, E.I): (BellLabel.PHI_PLUS, 0),
    (E.X, E.I): (BellLabel.PSI_PLUS, 0),
    (E.Y, E.I): (BellLabel.PSI_MINUS, 1),
    (E.Z, E.I): (BellLabel.PHI_MINUS, 1),
    (E.I, E.X): (BellLabel.PSI_PLUS, 1),
    (E.X, E.X): (BellLabel.PHI_PLUS, 1),
    (E.Y, E.X): (BellLabel.PHI_MINUS, 0),
    (E.Z, E.X): (BellLabel.PSI_MINUS, 0),
}


@dataclass
class CheckOutcome:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def _rng() -> np.random.Generator:
    return np.random.default_rng(0)


def simulate_label(initial: str, ops) -> str:
    """Prepare ``initial``, apply one op per qubit, GHZ-measure."""
    n = len(initial)
    s = apply_ops(prepare_ghz(n, initial), ops)
    return ghz_measure(s, range(n), _rng())


def table_one_cells() -> list[tuple[EncodingOp, EncodingOp, BellLabel, int]]:
    """Simulate every two-party cell: Alice leads on qubit 0, Bob follows on qubit 1."""
    cells = []
    for lead_op, fol_op in TABLE_I:
        s = apply_ops(prepare_bell(BellLabel.PHI_PLUS), [lead_op, fol_op])
        label = bell_measure(s, 0, 1, _rng())
        _, key = extract_key_leader(label.bits, lead_op, 0, 2)
        cells.append((lead_op, fol_op, label, key))
    return cells


def check_table_one() -> CheckOutcome:
    cells = table_one_cells()
    good = sum(TABLE_I[(l, f)] == (label, key) for l, f, label, key in cells)
    return CheckOutcome("table-I", good == 8, f"{good}/8 cells match")


def check_ghz_roundtrip(sizes=range(2, 6)) -> CheckOutcome:
    total = bad = 0
    for n in sizes:
        for label in ghz_basis(n):
            total += 1
            bad += ghz_measure(prepare_ghz(n, label), range(n), _rng()) != label
    return CheckOutcome("ghz-measurement", bad == 0, f"{total - bad}/{total} labels round-trip")


def check_cnot_scenario() -> CheckOutcome:
    final = cnot_attack_scenario()[-1]
    dev = float(np.max(np.abs(final.amps - CNOT_SCENARIO_FINAL)))
    return CheckOutcome("cnot-attack-state", dev <= 1e-12, f"max amplitude deviation {dev:.2e}")


def admissible_ops(n: int, leader_pos: int) -> Iterator[tuple[EncodingOp, ...]]:
    """Every op vector with the leader unrestricted and followers in {I, X}."""
    for lead in EncodingOp:
        for fol in itertools.product((E.I, E.X), repeat=n - 1):
            ops = list(fol)
            ops.insert(leader_pos, lead)
            yield tuple(ops)


def codebook_mismatches(n: int) -> tuple[int, int]:
    """(mismatches, cases) between the classical codebook and full simulation.

    Covers label_after_ops from every initial label, and both extraction
    viewpoints on every protocol outcome.
    """
    cases = bad = 0
    zero = "0" * n
    for leader_pos in range(n):
        for ops in admissible_ops(n, leader_pos):
            for initial in ghz_basis(n):
                cases += 1
                bad += label_after_ops(initial, ops, leader_pos) != simulate_label(initial, ops)
            outcome = simulate_label(zero, ops)
            lead_op = ops[leader_pos]
            followers = tuple(o for m, o in enumerate(ops) if m != leader_pos)
            expected_key = (leader_bit(lead_op, n) + sum(o.x for o in followers)) % 2
            cases += 1
            bad += extract_key_leader(outcome, lead_op, leader_pos, n) != (followers, expected_key)
            for own in range(n):
                if own == leader_pos:
                    continue
                cases += 1
                got = extract_key_follower(outcome, ops[own], own, leader_pos, n)
                bad += got != (lead_op, followers, expected_key)
    return bad, cases


def check_codebook(sizes=range(2, 6)) -> CheckOutcome:
    bad = cases = 0
    for n in sizes:
        b, c = codebook_mismatches(n)
        bad += b
        cases += c
    return CheckOutcome("codebook-equivalence", bad == 0, f"{bad} mismatches in {cases} cases")


BATTERY: list[Callable[[], CheckOutcome]] = [
    check_table_one,
    check_ghz_roundtrip,
    check_cnot_scenario,
    check_codebook,
]


def run_battery() -> list[CheckOutcome]:
    return [check() for check in BATTERY]
