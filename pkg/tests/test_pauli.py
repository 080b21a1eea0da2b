import numpy as np
import pytest
from hypothesis import given, strategies as st

from directrb.pauli import (Pauli, PauliDistribution, all_paulis, commutes, depolarizing_distribution,
                            index_bits, multiply, sample, symplectic_product, weight)

def pauli_strategy(n):
    return st.tuples(st.text("IXYZ", min_size=n, max_size=n), st.integers(0, 3)).map(
        lambda t: Pauli(Pauli.from_string(t[0]).x, Pauli.from_string(t[0]).z, t[1]))


def test_single_qubit_table():
    x, y = Pauli.from_string("X"), Pauli.from_string("Y")
    p = multiply(x, y)
    assert p.letters() == "Z" and p.phase == 1


def test_disjoint_supports():
    p = multiply(Pauli.from_string("XI"), Pauli.from_string("IZ"))
    assert p.letters() == "XZ" and p.phase == 0


@given(st.text("IXYZ", min_size=1, max_size=6))
def test_hermitian_square_is_identity(s):
    p = Pauli.from_string(s)
    q = multiply(p, p)
    assert q == Pauli.identity(len(s))


def test_weights():
    assert weight(Pauli.from_string("IXYZ")) == 3
    assert weight(Pauli.identity(5)) == 0
    assert weight(Pauli.from_string("XXXX")) == 4


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(pauli_strategy(n), pauli_strategy(n), pauli_strategy(n))))
def test_associative(abc):
    a, b, c = abc
    assert multiply(a, multiply(b, c)) == multiply(multiply(a, b), c)


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(pauli_strategy(n), pauli_strategy(n))))
def test_product_matches_matrices(ab):
    # dense matrix products are the oracle for the phase bookkeeping
    a, b = ab
    assert np.allclose(multiply(a, b).to_matrix(), a.to_matrix() @ b.to_matrix())


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(pauli_strategy(n), pauli_strategy(n))))
def test_commutation_phase(ab):
    a, b = ab
    ab_, ba = multiply(a, b), multiply(b, a)
    assert ab_.stripped() == ba.stripped()
    assert (ab_.phase - ba.phase) % 4 == 2 * symplectic_product(a, b)
    assert commutes(a, b) == (symplectic_product(a, b) == 0)


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(pauli_strategy(n), pauli_strategy(n))))
def test_weight_subadditive(ab):
    a, b = ab
    assert weight(multiply(a, b)) <= weight(a) + weight(b)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        multiply(Pauli.from_string("X"), Pauli.from_string("XX"))


def test_text_form_round_trip():
    for s in ("+XIZ", "-YY", "+iZ", "-iXY"):
        assert str(Pauli.from_string(s)) == s
    with pytest.raises(ValueError):
        Pauli.from_string("XQ")


def test_index_order_and_bits():
    ps = all_paulis(2)
    assert [p.letters() for p in ps[:5]] == ["II", "IX", "IY", "IZ", "XI"]
    for k, p in enumerate(ps):
        assert p.index() == k and Pauli.from_index(k, 2) == p
    bits = index_bits(np.arange(16), 2)
    for k, p in enumerate(ps):
        assert np.array_equal(bits[k], p.to_vector())


def test_sample_point_mass(rng):
    d = PauliDistribution({"I": 1.0})
    assert all(sample(d, rng) == Pauli.identity(1) for _ in range(50))


def test_sample_rare_error(rng):
    d = PauliDistribution({"I": 0.999, "X": 0.001})
    idx = rng.choice(2, size=10 ** 6, p=d._probs)
    freq = np.mean(idx == d._paulis.index(Pauli.from_string("X")))
    sigma = np.sqrt(0.001 * 0.999 / 1e6)
    assert abs(freq - 0.001) < 3 * sigma


def test_sample_uniform_three(rng):
    d = PauliDistribution({"X": 1 / 3, "Y": 1 / 3, "Z": 1 / 3})
    draws = [sample(d, rng).letters() for _ in range(6000)]
    for c in "XYZ":
        f = draws.count(c) / 6000
        assert abs(f - 1 / 3) < 3 * np.sqrt(2 / 9 / 6000)


def test_distribution_validation():
    with pytest.raises(ValueError):
        PauliDistribution({})
    with pytest.raises(ValueError):
        PauliDistribution({"I": 0.5, "X": 0.6})
    with pytest.raises(ValueError):
        PauliDistribution({"I": 1.1, "X": -0.1})
    # phases are stripped
    d = PauliDistribution({"-X": 0.5, "X": 0.5})
    assert d.support == {Pauli.from_string("X"): 1.0}


def test_depolarizing_distribution():
    d = depolarizing_distribution(2, 0.3)
    v = d.dense()
    assert np.isclose(v[0], 0.7 + 0.3 / 16)
    assert np.allclose(v[1:], 0.3 / 16)
    assert np.isclose(d.error_probability(), 0.3 * 15 / 16)
