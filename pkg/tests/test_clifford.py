import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import chisquare

from directrb.circuit import Circuit, Gate, circuit_unitary, gate_unitary
from directrb.clifford import (Clifford, NonCliffordGateError, compose, conjugate, gate_clifford, inverse,
                               is_symplectic, net_clifford, single_qubit_table, uniform_random)
from directrb.pauli import Pauli, multiply

ONEQ = ["I", "X", "Y", "Z", "H", "S", "X90", "Y90"]


def unitary_conjugation(u, p):
    return u @ p.to_matrix() @ u.conj().T


def random_circuit(n, depth, rng):
    gates = []
    for _ in range(depth):
        if n > 1 and rng.random() < 0.4:
            a, b = rng.choice(n, 2, replace=False)
            gates.append(Gate(str(rng.choice(["CNOT", "CPHASE"])), (int(a), int(b))))
        else:
            gates.append(Gate(str(rng.choice(ONEQ + ["SDG"])), (int(rng.integers(n)),)))
    return Circuit(n, [(g,) for g in gates])


def test_involutions():
    h = gate_clifford(Gate("H", (0,)), 1)
    s = gate_clifford(Gate("S", (0,)), 1)
    assert compose(h, h) == Clifford.identity(1)
    s4 = compose(s, compose(s, compose(s, s)))
    assert s4 == Clifford.identity(1)


def test_period_three_elements():
    # sqrt(Z) H cubed is a Pauli
    s = gate_clifford(Gate("S", (0,)), 1)
    h = gate_clifford(Gate("H", (0,)), 1)
    g = compose(s, h)
    g3 = compose(g, compose(g, g))
    assert g3.is_pauli()


def test_conjugation_examples():
    h = gate_clifford(Gate("H", (0,)), 1)
    assert conjugate(h, Pauli.from_string("X")) == Pauli.from_string("Z")
    cx = gate_clifford(Gate("CNOT", (0, 1)), 2)
    assert conjugate(cx, Pauli.from_string("XI")) == Pauli.from_string("XX")
    p = Pauli.from_string("-YZX")
    assert conjugate(Clifford.identity(3), p) == p


@pytest.mark.parametrize("name", ONEQ + ["SDG"])
def test_gate_conjugation_matches_unitary(name):
    c = gate_clifford(Gate(name, (0,)), 1)
    u = gate_unitary(Gate(name, (0,)))
    for s in "XYZ":
        p = Pauli.from_string(s)
        assert np.allclose(conjugate(c, p).to_matrix(), unitary_conjugation(u, p))


@given(st.integers(0, 2 ** 31))
def test_circuit_conjugation_matches_unitary(seed):
    # dense unitaries are the oracle for the tableau, including signs
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    circ = random_circuit(n, 8, rng)
    c = net_clifford(circ)
    u = circuit_unitary(circ)
    p = Pauli(rng.integers(0, 2, n), rng.integers(0, 2, n), 0)
    p = Pauli(p.x, p.z, (p.x & p.z).sum() % 4)  # Hermitian representative
    assert np.allclose(conjugate(c, p).to_matrix(), unitary_conjugation(u, p))


@given(st.integers(0, 2 ** 31))
def test_compose_inverse_and_symplectic(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    a, b = uniform_random(n, rng), uniform_random(n, rng)
    ab = compose(a, b)
    assert is_symplectic(ab.s) and is_symplectic(inverse(a).s)
    assert compose(a, inverse(a)) == Clifford.identity(n)
    assert compose(inverse(a), a) == Clifford.identity(n)
    p = Pauli(rng.integers(0, 2, n), rng.integers(0, 2, n), 0)
    # b acts first
    assert conjugate(ab, p) == conjugate(a, conjugate(b, p))


@given(st.integers(0, 2 ** 31))
def test_conjugation_is_homomorphism(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    c = uniform_random(n, rng)
    p = Pauli(rng.integers(0, 2, n), rng.integers(0, 2, n), int(rng.integers(4)))
    q = Pauli(rng.integers(0, 2, n), rng.integers(0, 2, n), int(rng.integers(4)))
    assert conjugate(c, multiply(p, q)) == multiply(conjugate(c, p), conjugate(c, q))


def test_net_clifford_of_circuits():
    assert net_clifford(Circuit(2, [])) == Clifford.identity(2)
    hh = Circuit(1, [(Gate("H", (0,)),), (Gate("H", (0,)),)])
    assert net_clifford(hh) == Clifford.identity(1)
    with pytest.raises(NonCliffordGateError):
        net_clifford(Circuit(1, [(Gate("Z", (0,), (0.3,)),)]))


def test_single_qubit_table():
    t = single_qubit_table()
    assert len(t) == 24
    assert len({c.key() for c in t.elements}) == 24
    for i in range(24):
        assert t.cayley[i, t.inverse[i]] == t.identity_index
    # closure and associativity of the Cayley table
    rng = np.random.default_rng(1)
    for _ in range(200):
        i, j, k = rng.integers(24, size=3)
        assert t.cayley[t.cayley[i, j], k] == t.cayley[i, t.cayley[j, k]]


def test_uniform_one_qubit_frequencies(rng):
    t = single_qubit_table()
    draws = 100_000
    counts = np.zeros(24)
    for _ in range(draws):
        counts[t.lookup(uniform_random(1, rng))] += 1
    p = 1 / 24
    assert np.all(np.abs(counts / draws - p) < 4 * np.sqrt(p * (1 - p) / draws))
    assert chisquare(counts).pvalue > 1e-3


def test_uniform_two_qubit_symplectic(rng):
    for _ in range(10_000):
        assert is_symplectic(uniform_random(2, rng).s)


def test_uniform_two_qubit_orbit_of_zi(rng):
    # the orbit of ZI under the two-qubit Clifford group is every non-identity Pauli with either sign;
    # uniform sampling must hit the 30 signed images equally often
    draws = 30_000
    counts = {}
    zi = Pauli.from_string("ZI")
    for _ in range(draws):
        img = str(conjugate(uniform_random(2, rng), zi))
        counts[img] = counts.get(img, 0) + 1
    assert len(counts) == 30
    assert chisquare(list(counts.values())).pvalue > 1e-3
