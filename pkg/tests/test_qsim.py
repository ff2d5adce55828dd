import numpy as np
import pytest
from hypothesis import given, strategies as st

from mqka.qsim import (
    GATES,
    MAX_QUBITS,
    Basis,
    QubitPool,
    RegisterSizeError,
    StateVector,
    apply_cnot,
    apply_gate1,
    measure_all,
    measure_and_discard,
    measure_qubit,
    new_basis_state,
    overlap,
    permute,
    qubit_probability_one,
    same_state,
    single_qubit,
    tensor,
)


def kron_gate(g, q, n):
    # oracle: full 2^n operator built with np.kron
    mats = [GATES["I"]] * n
    mats[q] = GATES[g]
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def cnot_matrix(c, t, n):
    dim = 1 << n
    m = np.zeros((dim, dim))
    for i in range(dim):
        bits = [(i >> (n - 1 - k)) & 1 for k in range(n)]
        if bits[c]:
            bits[t] ^= 1
        j = int("".join(map(str, bits)), 2)
        m[j, i] = 1
    return m


@st.composite
def random_states(draw, min_n=1, max_n=5):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    r = np.random.default_rng(seed)
    a = r.normal(size=1 << n) + 1j * r.normal(size=1 << n)
    return StateVector.from_amplitudes(a, normalize=True)


def test_big_endian_layout():
    s = new_basis_state(3, "101")
    assert s.amps[5] == 1
    assert s.num_qubits == 3


def test_basis_state_defaults_to_zero():
    assert new_basis_state(4).amps[0] == 1


@pytest.mark.parametrize("bad", [0, MAX_QUBITS + 1])
def test_register_size_bounds(bad):
    with pytest.raises(RegisterSizeError):
        new_basis_state(bad)


def test_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        StateVector.from_amplitudes([1, 0, 0])


def test_rejects_nan():
    with pytest.raises(ValueError):
        StateVector(1, np.array([np.nan, 0], dtype=complex))


@given(random_states(), st.sampled_from(list(GATES)), st.data())
def test_gate_matches_kron_oracle(s, g, data):
    q = data.draw(st.integers(0, s.num_qubits - 1))
    got = apply_gate1(s, g, q).amps
    want = kron_gate(g, q, s.num_qubits) @ s.amps
    np.testing.assert_allclose(got, want, atol=1e-12)


@given(random_states(min_n=2), st.data())
def test_cnot_matches_permutation_oracle(s, data):
    c = data.draw(st.integers(0, s.num_qubits - 1))
    t = data.draw(st.integers(0, s.num_qubits - 1).filter(lambda t: t != c))
    got = apply_cnot(s, c, t).amps
    np.testing.assert_allclose(got, cnot_matrix(c, t, s.num_qubits) @ s.amps, atol=1e-12)


def test_cnot_same_qubit_rejected():
    with pytest.raises(ValueError):
        apply_cnot(new_basis_state(2), 1, 1)


@given(random_states())
def test_gates_preserve_norm(s):
    for g in GATES:
        s = apply_gate1(s, g, 0)
    assert abs(s.norm() - 1) < 1e-12


@given(random_states(max_n=3), random_states(max_n=3))
def test_tensor_is_kron(a, b):
    np.testing.assert_allclose(tensor(a, b).amps, np.kron(a.amps, b.amps))


def test_single_qubit_states():
    assert same_state(single_qubit(Basis.X, 0), apply_gate1(new_basis_state(1), "H", 0))
    minus = single_qubit("X", 1)
    np.testing.assert_allclose(minus.amps, np.array([1, -1]) / np.sqrt(2))


def test_measure_z_deterministic(rng):
    s = new_basis_state(3, "110")
    assert measure_all(s, rng) == "110"
    bit, post = measure_qubit(s, 2, Basis.Z, rng)
    assert bit == 0 and same_state(post, s)


def test_measure_x_on_plus_minus(rng):
    for bit in (0, 1):
        got, _ = measure_qubit(single_qubit(Basis.X, bit), 0, Basis.X, rng)
        assert got == bit


def test_measure_collapses_bell(rng):
    bell = apply_cnot(apply_gate1(new_basis_state(2), "H", 0), 0, 1)
    for _ in range(20):
        bit, rest = measure_and_discard(bell, 0, Basis.Z, rng)
        assert rest.num_qubits == 1
        assert same_state(rest, new_basis_state(1, str(bit)))


def test_measure_last_qubit_discards_to_none(rng):
    bit, rest = measure_and_discard(new_basis_state(1, "1"), 0, Basis.Z, rng)
    assert bit == 1 and rest is None


def test_measurement_statistics():
    r = np.random.default_rng(7)
    s = single_qubit(Basis.X, 0)
    assert qubit_probability_one(s, 0) == pytest.approx(0.5)
    ones = sum(measure_qubit(s, 0, Basis.Z, r)[0] for _ in range(4000))
    assert abs(ones / 4000 - 0.5) < 0.03


def test_overlap_is_phase_blind():
    s = single_qubit(Basis.X, 1)
    t = StateVector.from_amplitudes(-1j * s.amps)
    assert overlap(s, t) == pytest.approx(1.0)
    assert same_state(s, t)
    assert not same_state(s, single_qubit(Basis.X, 0))


def test_permute_moves_qubits():
    s = new_basis_state(3, "100")
    assert same_state(permute(s, [1, 2, 0]), new_basis_state(3, "001"))


def test_pool_merges_and_consumes(rng):
    pool = QubitPool(rng)
    (a,) = pool.add(single_qubit(Basis.X, 0))
    (b,) = pool.add(new_basis_state(1))
    assert pool.register_size(a) == 1
    pool.cnot(a, b)
    assert pool.register_size(a) == 2
    bell = apply_cnot(apply_gate1(new_basis_state(2), "H", 0), 0, 1)
    assert same_state(pool.state_of([a, b]), bell)
    x = pool.measure(a)
    assert pool.measure(b) == x
    assert a not in pool and len(pool) == 0


def test_pool_state_of_order(rng):
    pool = QubitPool(rng)
    a, b = pool.add(new_basis_state(2, "10"))
    assert same_state(pool.state_of([b, a]), new_basis_state(2, "01"))


def test_pool_overflow(rng):
    pool = QubitPool(rng, max_qubits=3)
    hs = pool.add(new_basis_state(2))
    (c,) = pool.add(new_basis_state(2))[:1]
    (d,) = pool.add(new_basis_state(1))
    pool.cnot(hs[0], d)
    with pytest.raises(RegisterSizeError):
        pool.cnot(hs[0], c)


def test_pool_unknown_handle(rng):
    pool = QubitPool(rng)
    with pytest.raises(KeyError):
        pool.measure(99)
