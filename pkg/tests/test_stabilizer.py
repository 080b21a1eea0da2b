import numpy as np
import pytest
from hypothesis import given, strategies as st

from directrb.circuit import Circuit, Gate, circuit_unitary
from directrb.clifford import net_clifford, uniform_random
from directrb.connectivity import Connectivity
from directrb.pauli import Pauli
from directrb.stabilizer import (StabilizerState, apply, apply_circuit, compile_measurement_prep,
                                 compile_state_prep, compile_unitary, is_eigenstate, outcome_probability)


def random_state(n, rng):
    return StabilizerState.from_clifford(uniform_random(n, rng))


def dense_probability(circuit, bits):
    # state-vector oracle: |<bits| U |0>|^2 with qubit 0 the most significant position
    u = circuit_unitary(circuit)
    return abs(u[int(bits, 2), 0]) ** 2


def test_apply_examples():
    plus = apply(StabilizerState.zero(1), (Gate("H", (0,)),))
    assert plus == StabilizerState.from_strings(["X"])
    bell = apply(apply(StabilizerState.zero(2), (Gate("H", (0,)),)), (Gate("CNOT", (0, 1)),))
    assert bell == StabilizerState.from_strings(["XX", "ZZ"])
    s = StabilizerState.from_strings(["XZ", "ZX"])
    assert apply(s, (Gate("I", (0,)), Gate("I", (1,)))) == s


def test_outcome_examples():
    assert outcome_probability(StabilizerState.zero(3), "000") == 1.0
    assert outcome_probability(StabilizerState.from_strings(["X"]), "0") == 0.5
    bell = StabilizerState.from_strings(["XX", "ZZ"])
    assert outcome_probability(bell, "01") == 0.0
    assert outcome_probability(bell, "11") == 0.5


@given(st.integers(0, 2 ** 31))
def test_outcomes_match_state_vectors(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    c = compile_unitary(uniform_random(n, rng)).circuit
    state = apply_circuit(StabilizerState.zero(n), c)
    for k in range(2 ** n):
        bits = format(k, f"0{n}b")
        assert np.isclose(outcome_probability(state, bits), dense_probability(c, bits), atol=1e-12)


def test_prep_examples():
    empty = compile_state_prep(StabilizerState.zero(3))
    assert empty.twoq_count == 0 and len(list(empty.circuit.gates())) == 0
    plus = compile_state_prep(StabilizerState.from_strings(["XII", "IXI", "IIX"]))
    assert plus.twoq_count == 0
    assert sorted(g.name for g in plus.circuit.gates()) == ["H", "H", "H"]
    assert len(list(compile_measurement_prep(StabilizerState.zero(2), "00").circuit.gates())) == 0
    one = compile_measurement_prep(StabilizerState.from_strings(["X"]), "0")
    assert [g.name for g in one.circuit.gates()] == ["H"]


def test_unitary_examples():
    assert len(list(compile_unitary(uniform_random(2, np.random.default_rng(0)).__class__.identity(2))
                    .circuit.gates())) == 0
    h = net_clifford(Circuit(1, [(Gate("H", (0,)),)]))
    cc = compile_unitary(h)
    assert len(list(cc.circuit.gates())) == 1


@pytest.mark.parametrize("conn_name", ["all_to_all", "linear", "ring"])
def test_state_prep_round_trip(conn_name, rng):
    for _ in range(500 if conn_name == "all_to_all" else 100):
        n = int(rng.integers(1, 9))
        conn = Connectivity.from_spec(conn_name, n)
        t = random_state(n, rng)
        cc = compile_state_prep(t, conn)
        assert apply_circuit(StabilizerState.zero(n), cc.circuit) == t
        for g in cc.circuit.gates():
            if g.is_two_qubit:
                assert conn.adjacent(*g.qubits)
        assert cc.twoq_count == sum(g.is_two_qubit for g in cc.circuit.gates())


def test_measurement_prep_returns_target(rng):
    for _ in range(200):
        n = int(rng.integers(1, 7))
        cur = random_state(n, rng)
        bits = "".join(str(b) for b in rng.integers(0, 2, n))
        cc = compile_measurement_prep(cur, bits, Connectivity.linear(n))
        assert outcome_probability(apply_circuit(cur, cc.circuit), bits) == 1.0


def test_compile_unitary_exact(rng):
    for _ in range(100):
        n = int(rng.integers(1, 6))
        c = uniform_random(n, rng)
        conn = Connectivity.ring(n)
        assert net_clifford(compile_unitary(c, conn).circuit) == c


def test_disconnected_connectivity_rejected(rng):
    conn = Connectivity(3, ((0, 1),))
    t = StabilizerState.from_strings(["XXX", "ZZI", "IZZ"])
    with pytest.raises(ValueError):
        compile_state_prep(t, conn)


def test_conditional_cheaper_than_unconditional(rng):
    n = 8
    prep = np.mean([compile_state_prep(random_state(n, rng)).twoq_count for _ in range(200)])
    full = np.mean([compile_unitary(uniform_random(n, rng)).twoq_count for _ in range(200)])
    assert prep < full


@pytest.mark.parametrize("n", [2, 3])
def test_eigenstate_fraction(n, rng):
    # a random stabilizer state is an eigenstate of a fixed Pauli with probability 1/(2^n + 1)
    trials = 20_000
    p = Pauli.from_string("X" + "I" * (n - 1))
    hits = sum(is_eigenstate(random_state(n, rng), p) for _ in range(trials))
    q = 1 / (2 ** n + 1)
    assert abs(hits / trials - q) < 3 * np.sqrt(q * (1 - q) / trials)


def test_quadratic_two_qubit_growth(rng):
    ns = np.arange(2, 13)
    counts = [np.mean([compile_unitary(uniform_random(int(n), rng)).twoq_count for _ in range(10)]) for n in ns]
    c = max(cnt / n ** 2 for cnt, n in zip(counts, ns))
    assert c < 3.0
    # growth exponent of the fitted power law stays near 2
    slope = np.polyfit(np.log(ns[3:]), np.log(counts[3:]), 1)[0]
    assert 1.5 < slope < 2.3
