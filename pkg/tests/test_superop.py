import numpy as np
import pytest
from hypothesis import given, strategies as st

from directrb.circuit import Circuit, Gate
from directrb.clifford import Clifford, uniform_random
from directrb.pauli import PauliDistribution
from directrb.stabilizer import StabilizerState, apply_circuit, compile_unitary, outcome_probability
from directrb.superop import (GaugeMap, Ptm, apply_to_operator, average_gate_infidelity, choi_trace_norm,
                              depolarizing, depolarizing_parameter, entanglement_infidelity, gauge_transform,
                              is_completely_positive, pauli_channel, pauli_twirl, ptm_from_unitary,
                              ptm_of_clifford, ptm_of_unitary, state_vector, tensor)


def random_channel(n, rng, strength=0.1):
    # random Kraus channel near the identity, turned into a PTM through its action on operators
    d = 2 ** n
    k = [np.eye(d) + strength * (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) for _ in range(3)]
    s = sum(a.conj().T @ a for a in k)
    w, v = np.linalg.eigh(s)
    root = v @ np.diag(w ** -0.5) @ v.conj().T
    k = [a @ root for a in k]
    from directrb.superop import pauli_basis
    b = pauli_basis(n)
    m = np.real(np.einsum("jab,kba->jk", b, np.einsum("iad,kde,ife->kaf", np.array(k), b, np.array(k).conj())))
    return Ptm(n, m)


def test_identity_and_hadamard():
    assert np.array_equal(ptm_of_unitary(Clifford.identity(2)).m, np.eye(16))
    h = ptm_of_unitary(Gate("H", (0,))).m
    expected = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0], [0, 1, 0, 0]], dtype=float)
    assert np.allclose(h, expected, atol=1e-12)


@pytest.mark.parametrize("theta", [0.3, 1.0, np.pi / 2, 2.5])
def test_z_rotation_block(theta):
    m = ptm_of_unitary(Gate("Z", (0,), (theta,))).m
    c, s = np.cos(theta), np.sin(theta)
    expected = np.array([[1, 0, 0, 0], [0, c, -s, 0], [0, s, c, 0], [0, 0, 0, 1]])
    assert np.allclose(m, expected, atol=1e-12)


def test_clifford_ptm_matches_dense(rng):
    for _ in range(20):
        n = int(rng.integers(1, 3))
        c = uniform_random(n, rng)
        from directrb.circuit import circuit_unitary
        u = circuit_unitary(compile_unitary(c).circuit)
        assert np.allclose(ptm_of_clifford(c), ptm_from_unitary(u), atol=1e-10)
        m = ptm_of_clifford(c)
        assert np.allclose(m @ m.T, np.eye(4 ** n))


def test_infidelity_examples():
    e = ptm_of_unitary(Gate("H", (0,)))
    assert abs(entanglement_infidelity(e, e)) < 1e-12
    for n, lam in [(1, 0.9), (2, 0.97), (3, 0.5)]:
        r = entanglement_infidelity(depolarizing(n, lam))
        assert np.isclose(r, (4 ** n - 1) * (1 - lam) / 4 ** n)
    assert np.isclose(average_gate_infidelity(depolarizing(1, 0.99)), 0.005)
    # eps_A = eps_E * 2/3 at n = 1
    lam = 1 - 0.03 * 4 / 3
    assert np.isclose(average_gate_infidelity(depolarizing(1, lam)), 0.02)


def test_tensor_fidelity_multiplies(rng):
    for k in (2, 3):
        chans = [random_channel(1, rng) for _ in range(k)]
        fids = [1 - entanglement_infidelity(c) for c in chans]
        assert np.isclose(1 - entanglement_infidelity(tensor(*chans)), np.prod(fids), atol=1e-12)


def test_singular_target_rejected():
    with pytest.raises(np.linalg.LinAlgError):
        entanglement_infidelity(depolarizing(1, 0.5), depolarizing(1, 0.0))


def test_depolarizing_examples():
    assert np.array_equal(depolarizing(2, 1.0).m, np.eye(16))
    zero = depolarizing(1, 0.0).m
    assert np.linalg.matrix_rank(zero) == 1 and zero[0, 0] == 1
    ev = np.sort(np.linalg.eigvals(depolarizing(2, 0.7).m).real)
    assert np.allclose(ev, [0.7] * 15 + [1.0])
    with pytest.raises(ValueError):
        depolarizing(1, 1.1)
    with pytest.raises(ValueError):
        depolarizing(1, -0.5)
    depolarizing(1, -1 / 3)
    assert np.isclose(depolarizing_parameter(depolarizing(2, 0.3)), 0.3)


def test_gauge_examples(rng):
    e = random_channel(1, rng)
    assert np.allclose(gauge_transform(GaugeMap(np.eye(4)), e).m, e.m)
    g = GaugeMap(np.eye(4) + 0.2 * rng.normal(size=(4, 4)))
    ev1 = np.sort_complex(np.linalg.eigvals(e.m))
    ev2 = np.sort_complex(np.linalg.eigvals(gauge_transform(g, e).m))
    assert np.allclose(ev1, ev2, atol=1e-9)


def test_gauge_leaves_outcomes_unchanged(rng):
    n = 1
    layers = [random_channel(n, rng) for _ in range(3)]
    rho = state_vector(n)
    meas = state_vector(n, "1")
    p = meas @ layers[2].m @ layers[1].m @ layers[0].m @ rho
    g = GaugeMap(np.eye(4) + 0.3 * rng.normal(size=(4, 4)))
    gl = [gauge_transform(g, e).m for e in layers]
    ginv = g.inverse_matrix()
    p2 = (meas @ ginv) @ gl[2] @ gl[1] @ gl[0] @ (g.m @ rho)
    assert np.isclose(p, p2, atol=1e-12)


def test_circuit_ptm_matches_stabilizer(rng):
    for _ in range(100):
        n = int(rng.integers(1, 4))
        circ = compile_unitary(uniform_random(n, rng)).circuit
        m = ptm_of_unitary(circ).m
        state = apply_circuit(StabilizerState.zero(n), circ)
        for k in range(2 ** n):
            bits = format(k, f"0{n}b")
            p_ptm = state_vector(n, bits) @ m @ state_vector(n)
            assert abs(p_ptm - outcome_probability(state, bits)) < 1e-10


@given(st.integers(0, 2 ** 31), st.integers(1, 2))
def test_pauli_channel_infidelity_is_error_rate(seed, n):
    rng = np.random.default_rng(seed)
    probs = rng.dirichlet(np.ones(4 ** n))
    dist = PauliDistribution.from_vector(probs, n)
    assert np.isclose(entanglement_infidelity(pauli_channel(dist)), 1 - probs[0], atol=1e-12)


def test_pauli_channel_matches_operator_sum(rng):
    from directrb.pauli import Pauli
    probs = rng.dirichlet(np.ones(16))
    e = pauli_channel(PauliDistribution.from_vector(probs, 2))
    op = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    direct = sum(pr * Pauli.from_index(k, 2).to_matrix() @ op @ Pauli.from_index(k, 2).to_matrix().conj().T
                 for k, pr in enumerate(probs))
    assert np.allclose(apply_to_operator(e, op), direct, atol=1e-12)


def test_cp_and_trace_norm(rng):
    e = random_channel(1, rng)
    assert e.is_tp and is_completely_positive(e)
    assert not is_completely_positive(Ptm(1, np.diag([1, 1, 1, -1.0])))
    assert np.isclose(choi_trace_norm(e), 1.0)
    assert np.isclose(entanglement_infidelity(pauli_twirl(e)), entanglement_infidelity(e))


def test_csv_round_trip(tmp_path, rng):
    e = random_channel(2, rng)
    e.to_csv(tmp_path / "e.csv")
    back = Ptm.from_csv(tmp_path / "e.csv")
    assert back.n == 2 and np.array_equal(back.m, e.m)


def test_composition_order():
    h = ptm_of_unitary(Gate("H", (0,)))
    s = ptm_of_unitary(Gate("S", (0,)))
    c = Circuit(1, [(Gate("H", (0,)),), (Gate("S", (0,)),)])
    assert np.allclose((s @ h).m, ptm_of_unitary(c).m)
