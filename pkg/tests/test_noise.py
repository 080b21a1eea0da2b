import itertools

import numpy as np
import pytest

from directrb.circuit import Gate, gate_unitary
from directrb.connectivity import Connectivity
from directrb.engine import exact_success
from directrb.noise import (GENERATOR_LABELS, ErrorModel, ModelCoverageError, WeightProfile, combine_factors,
                            Factor, elementary_generator, epsilon_omega, error_channel,
                            generator_error_map, global_depolarizing, load_rate_table, local_depolarizing,
                            markovian_from_ptms, sample_markovian_model, sample_stochastic_pauli_model,
                            save_rate_table, weighted_local)
from directrb.pauli import Pauli
from directrb.protocol import ExperimentDesign, RbCircuit, generate_direct_rb
from directrb.sampling import SamplingDistribution
from directrb.superop import Ptm, choi, entanglement_infidelity, is_completely_positive, pauli_twirl


def test_global_depolarizing_distribution():
    for n, lam in [(1, 0.9), (2, 0.95)]:
        dist = error_channel(global_depolarizing(n, lam), ()).dense()
        assert np.isclose(dist[0], lam + (1 - lam) / 4 ** n)
        assert np.allclose(dist[1:], (1 - lam) / 4 ** n)


def test_local_depolarizing_epsilon():
    for n in (1, 3, 5):
        model = local_depolarizing(n, 0.001)
        om = SamplingDistribution("edge_grab", {"xi_bar": 0.0})
        assert np.isclose(epsilon_omega(model, om), 1 - 0.999 ** n)
        assert np.isclose(model.layer_infidelity(()), 1 - 0.999 ** n)


def test_combined_factors_match_direct_product():
    rng = np.random.default_rng(0)
    pa, pb = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(16))
    dense = combine_factors(3, [Factor((1,), pa), Factor((2, 0), pb)])
    # oracle: multiply the Pauli labels letter by letter
    expected = np.zeros(64)
    for i, j in itertools.product(range(4), range(16)):
        a = Pauli.from_index(i, 1).letters()
        b = Pauli.from_index(j, 2).letters()
        full = ["I", a, "I"]
        full[2], full[0] = b[0], b[1]
        expected[Pauli.from_string("".join(full)).index()] += pa[i] * pb[j]
    assert np.allclose(dense, expected)


def test_zero_generators_identity():
    assert np.allclose(generator_error_map(np.zeros(12)), np.eye(4))


def test_generators_are_trace_preserving():
    for lbl in GENERATOR_LABELS:
        g = elementary_generator(lbl)
        assert np.allclose(g[0], 0)
    # Hamiltonian generators are antisymmetric, stochastic ones diagonal
    for lbl in ("H_X", "H_Y", "H_Z"):
        assert np.allclose(elementary_generator(lbl), -elementary_generator(lbl).T)
    for lbl in ("S_X", "S_Y", "S_Z"):
        g = elementary_generator(lbl)
        assert np.allclose(g, np.diag(np.diag(g)))


def test_h_generator_is_a_rotation():
    # exp(v H_Z) must be the PTM of exp(-i v Z) acting by conjugation (angle 2 v)
    v = 0.37
    m = generator_error_map([0, 0, v] + [0] * 9)
    c, s = np.cos(2 * v), np.sin(2 * v)
    assert np.allclose(m[1:3, 1:3], [[c, -s], [s, c]])


def test_stochastic_rates_first_order(rng):
    for _ in range(100):
        v = np.zeros(12)
        v[3:6] = rng.uniform(0, 0.01, 3)
        eps = entanglement_infidelity(Ptm(1, generator_error_map(v)))
        total = v[3:6].sum()
        assert abs(eps - total) < 2 * total ** 2


def test_hamiltonian_rate_second_order():
    vs = np.geomspace(1e-4, 1e-2, 12)
    eps = [entanglement_infidelity(Ptm(1, generator_error_map([v, 0, 0] + [0] * 9))) for v in vs]
    slope = np.polyfit(np.log(vs), np.log(eps), 1)[0]
    assert abs(slope - 2.0) < 0.1


def test_markovian_models_cptp(rng):
    for eps in (0.001, 0.01):
        model = sample_markovian_model(eps, rng)
        for e in model.params["errors"].values():
            p = Ptm(1, e)
            assert p.is_tp
            assert np.linalg.eigvalsh(choi(p)).min() >= -1e-10
    with pytest.raises(ValueError):
        sample_markovian_model(0.0, rng)


def test_small_epsilon_limit(rng):
    for eps in (1e-3, 1e-5, 1e-7):
        model = sample_markovian_model(eps, rng)
        # Hamiltonian rates are at most sqrt(eps), so their contribution is O(eps) as well
        assert entanglement_infidelity(Ptm(1, model.params["errors"]["X90"])) < 10 * eps


def test_weighted_local_epsilon():
    prof = WeightProfile.from_omega1(0.6, 5, 0.01)
    assert np.isclose(prof.weights.sum(), 1) and np.isclose(prof.weights[0], 0.6)
    model = weighted_local(prof)
    assert np.isclose(epsilon_omega(model, None), 1 - np.prod(1 - prof.eps_tilde * prof.weights))
    assert np.isclose(epsilon_omega(model, None), 0.01)
    homog = WeightProfile.from_omega1(0.2, 5, 0.01)
    assert np.allclose(homog.weights, 0.2)


def test_epsilon_omega_point_mass_and_independence(rng):
    model = sample_stochastic_pauli_model(1, [], 0.01, rng)
    layers = [(Gate("X90", (0,)),), (Gate("Y90", (0,)),)]
    for k, layer in enumerate(layers):
        om = SamplingDistribution("custom_weighted", {"layers": layers, "weights": [1.0 - k, float(k)]})
        expected = 1 - model.gate_probs(layer[0])[0]
        assert np.isclose(epsilon_omega(model, om), expected)
    flat = local_depolarizing(1, 0.02)
    for w in ([0.3, 0.7], [0.9, 0.1]):
        om = SamplingDistribution("custom_weighted", {"layers": layers, "weights": w})
        assert np.isclose(epsilon_omega(flat, om), 0.02)


def test_rate_table_round_trip(tmp_path, rng):
    model = sample_stochastic_pauli_model(3, [(0, 1), (1, 2)], 0.01, rng)
    save_rate_table(model.params["table"], tmp_path / "r.csv")
    back = load_rate_table(tmp_path / "r.csv")
    assert back.keys() == model.params["table"].keys()
    for k, v in back.items():
        assert np.array_equal(v, model.params["table"][k])
    (tmp_path / "bad.csv").write_text("# comment\nCNOT,0 1,0.5,0.5\n")
    with pytest.raises(ValueError, match="bad.csv:2"):
        load_rate_table(tmp_path / "bad.csv")


def test_model_validation(rng):
    with pytest.raises(ValueError):
        ErrorModel("stochastic_pauli", 1, {"table": {("X", (0,)): [0.5, 0.6, 0, 0]}})
    with pytest.raises(ValueError):
        global_depolarizing(1, 1.5)
    with pytest.raises(ValueError):
        markovian_from_ptms({"X90": np.diag([0.9, 1, 1, 1])})
    model = sample_stochastic_pauli_model(2, [(0, 1)], 0.01, rng, oneq_names=("X90",))
    with pytest.raises(ModelCoverageError):
        model.gate_probs(Gate("X90", (5,)))


def test_stochastic_layer_channels_cptp(rng):
    model = sample_stochastic_pauli_model(2, [(0, 1)], 0.02, rng)
    for layer in [(Gate("CNOT", (0, 1)),), (Gate("X90", (0,)), Gate("Y90", (1,)))]:
        e = model.layer_error_ptm(layer)
        assert e.is_tp and is_completely_positive(e)


# ---------------------------------------------------------------------------
# twirling the error maps leaves ensemble-averaged success unchanged

PAULI_LETTERS = "IXYZ"


def _clifford_index_of(u):
    from directrb.clifford import single_qubit_table
    for k in range(len(single_qubit_table().elements)):
        v = gate_unitary(Gate(f"C{k}", (0,)))
        if abs(abs(np.trace(v.conj().T @ u)) - 2) < 1e-9:
            return k
    raise AssertionError("not a Clifford")


def _pauli_u(letter):
    return gate_unitary(Gate(letter, (0,)))


def _framed(c: RbCircuit, frames):
    """Insert Pauli frames after each core layer and absorb them into neighbouring gates.

    ``frames[k]`` holds the per-qubit letters applied right after core layer k.
    Each one is undone by the next core layer (or by an extra layer in front
    of the perfect measurement circuit), so the ideal circuit is unchanged.
    """
    n = c.n
    sp, core, mp = c.parts()
    new_core = []
    for k, layer in enumerate(core):
        gates = []
        for g in layer:
            q = g.qubits[0]
            u = gate_unitary(g)
            before = _pauli_u(frames[k - 1][q]) if k > 0 else np.eye(2)
            u = _pauli_u(frames[k][q]) @ u @ before
            gates.append(Gate(f"C{_clifford_index_of(u)}", (q,)))
        new_core.append(tuple(gates))
    undo = tuple(Gate(frames[-1][q], (q,)) for q in range(n))
    from directrb.circuit import Circuit
    layers = list(sp) + new_core + [undo] + list(mp)
    return RbCircuit(c.id, c.d, c.target, Circuit(n, layers), len(sp), len(core), len(mp) + 1)


@pytest.mark.parametrize("n", [1, 2])
def test_pauli_twirl_leaves_success_unchanged(n, rng):
    # oracle: average the exact success over every Pauli frame (16^n per core layer);
    # this is the circuit-ensemble symmetry behind replacing an error by its Pauli twirl
    e = sample_markovian_model(0.02, rng, gates=("X90",)).params["errors"]["X90"]
    names = [f"C{k}" for k in range(24)]
    model = markovian_from_ptms({nm: e for nm in names} | {p: np.eye(4) for p in PAULI_LETTERS}, n)
    twirled = markovian_from_ptms({nm: pauli_twirl(Ptm(1, e)).m for nm in names}
                                  | {p: np.eye(4) for p in PAULI_LETTERS}, n)
    om = SamplingDistribution("edge_grab", {"xi_bar": 0.0, "pool": "clifford24"})
    design = ExperimentDesign(n, depths=(1, 2), K_d=2, omega=om, rng_seed=8)
    for c in generate_direct_rb(design, Connectivity.linear(n)):
        letters = ["".join(t) for t in itertools.product(PAULI_LETTERS, repeat=n)]
        vals = [exact_success(_framed(c, fr), model) for fr in itertools.product(letters, repeat=c.d)]
        assert abs(np.mean(vals) - exact_success(c, twirled)) < 1e-10
    # the untwirled single-circuit value differs in general, so the test has teeth
    assert any(abs(exact_success(c, model) - exact_success(c, twirled)) > 1e-6
               for c in generate_direct_rb(design, Connectivity.linear(n)))
