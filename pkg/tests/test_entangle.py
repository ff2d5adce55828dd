import numpy as np
import pytest
from hypothesis import given, strategies as st

from mqka.entangle import (
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
from mqka.qsim import StateVector, apply_cnot, apply_gate1, new_basis_state, same_state

R2 = 1 / np.sqrt(2)

# written out by hand: label -> (first ket, second ket, sign)
THREE_QUBIT = {
    "000": ("000", "111", +1),
    "100": ("000", "111", -1),
    "001": ("001", "110", +1),
    "101": ("001", "110", -1),
    "010": ("010", "101", +1),
    "110": ("010", "101", -1),
    "011": ("011", "100", +1),
    "111": ("011", "100", -1),
}


def ket_pair(a, b, sign):
    amps = np.zeros(1 << len(a), dtype=complex)
    amps[int(a, 2)] = R2
    amps[int(b, 2)] = sign * R2
    return StateVector.from_amplitudes(amps)


@pytest.mark.parametrize("label", sorted(THREE_QUBIT))
def test_three_qubit_states_by_hand(label, rng):
    want = ket_pair(*THREE_QUBIT[label])
    assert same_state(prepare_ghz(3, label), want)
    assert ghz_measure(want, [0, 1, 2], rng) == label


def test_bell_labels():
    assert same_state(prepare_bell(BellLabel.PHI_PLUS), ket_pair("00", "11", 1))
    assert same_state(prepare_bell(BellLabel.PHI_MINUS), ket_pair("00", "11", -1))
    assert same_state(prepare_bell(BellLabel.PSI_PLUS), ket_pair("01", "10", 1))
    assert same_state(prepare_bell(BellLabel.PSI_MINUS), ket_pair("01", "10", -1))
    assert BellLabel.PSI_MINUS.symbol == "Ψ-"


def test_bell_from_circuit(rng):
    # H then CNOT on |00> gives Phi+
    s = apply_cnot(apply_gate1(new_basis_state(2), "H", 0), 0, 1)
    assert bell_measure(s, 0, 1, rng) is BellLabel.PHI_PLUS


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_roundtrip_all_labels(n, rng):
    for label in ghz_basis(n):
        assert ghz_measure(prepare_ghz(n, label), range(n), rng) == label


def test_ghz_basis_is_orthonormal():
    states = np.array([prepare_ghz(4, l).amps for l in ghz_basis(4)])
    np.testing.assert_allclose(states.conj() @ states.T, np.eye(16), atol=1e-12)


def test_measure_on_subset_of_larger_register(rng):
    s = StateVector.from_amplitudes(np.kron(new_basis_state(1, "1").amps, prepare_ghz(3, "110").amps))
    assert ghz_measure(s, [1, 2, 3], rng) == "110"


@pytest.mark.parametrize("qubits", [[0], [1, 1]])
def test_ghz_measure_rejects_bad_qubits(qubits, rng):
    with pytest.raises(ValueError):
        ghz_measure(prepare_ghz(2, "00"), qubits, rng)


@pytest.mark.parametrize("label", ["0", "012", ""])
def test_bad_labels(label):
    with pytest.raises(ValueError):
        prepare_ghz(max(len(label), 1), label)


def test_encoding_components():
    assert [(o.x, o.z) for o in EncodingOp] == [(0, 0), (1, 0), (1, 1), (0, 1)]
    assert EncodingOp.from_components(1, 1) is EncodingOp.Y


@st.composite
def label_and_ops(draw):
    n = draw(st.integers(2, 5))
    leader = draw(st.integers(0, n - 1))
    label = "".join(draw(st.lists(st.sampled_from("01"), min_size=n, max_size=n)))
    ops = [draw(st.sampled_from("IX")) for _ in range(n)]
    ops[leader] = draw(st.sampled_from("IXYZ"))
    return label, ops, leader


@given(label_and_ops())
def test_label_algebra_matches_simulation(case):
    label, ops, leader = case
    rng = np.random.default_rng(0)
    s = apply_ops(prepare_ghz(len(label), label), ops)
    assert label_after_ops(label, ops, leader) == ghz_measure(s, range(len(label)), rng)


def test_follower_cannot_phase_flip():
    with pytest.raises(ValueError):
        label_after_ops("000", ["I", "Z", "I"], leader_pos=0)


def test_op_count_must_match():
    with pytest.raises(ValueError):
        label_after_ops("000", ["I", "I"])
