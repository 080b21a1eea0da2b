import csv
import io

import numpy as np
import pytest
from scipy.stats import chisquare

from directrb.connectivity import Connectivity
from directrb.scramble import (apply_cnot, apply_random_oneq_layer, binomial_sigma, cnot_transition_frequencies,
                               exact_transition_table, k_delocal, one_qubit_image_table, per_qubit_condition,
                               propagate_weight_stats, reliability_verdict, weights, wilson_interval)
from directrb.clifford import conjugate, single_qubit_table
from directrb.pauli import Pauli

CODE_TO_LETTER = {0: "I", 1: "X", 2: "Z", 3: "Y"}


def test_image_table_matches_conjugation():
    table = one_qubit_image_table()
    for k, c in enumerate(single_qubit_table().elements):
        for code, letter in CODE_TO_LETTER.items():
            img = conjugate(c, Pauli.from_string(letter)).letters()
            assert CODE_TO_LETTER[int(table[k, code])] == img


def test_cnot_rule_matches_conjugation():
    from directrb.circuit import Circuit, Gate
    from directrb.clifford import net_clifford
    cnot = net_clifford(Circuit(2, [(Gate("CNOT", (0, 1)),)]))
    for a in "IXYZ":
        for b in "IXYZ":
            p = Pauli.from_string(a + b)
            x = p.x[None, :].astype(np.uint8).copy()
            z = p.z[None, :].astype(np.uint8).copy()
            apply_cnot(x, z, 0, 1)
            img = conjugate(cnot, p)
            assert np.array_equal(x[0], img.x) and np.array_equal(z[0], img.z)


def test_transition_laws():
    assert exact_transition_table() == {"spread": (4, 6), "recombine": (4, 9)}
    trials = 100_000
    f = cnot_transition_frequencies(trials, np.random.default_rng(1))
    assert abs(f["spread"] - 2 / 3) < 3 * binomial_sigma(2 / 3, trials)
    assert abs(f["recombine"] - 4 / 9) < 3 * binomial_sigma(4 / 9, trials)


@pytest.mark.parametrize("w", [1, 2])
def test_one_layer_randomizes_support(w, rng):
    trials = 30_000
    x = np.zeros((trials, 4), dtype=np.uint8)
    z = np.zeros((trials, 4), dtype=np.uint8)
    x[:, :w] = 1
    apply_random_oneq_layer(x, z, rng)
    codes = (x[:, :w] | (z[:, :w] << 1)).astype(int)
    assert np.all(codes > 0) and not x[:, w:].any() and not z[:, w:].any()
    pattern = sum((codes[:, i] - 1) * 3 ** i for i in range(w))
    assert chisquare(np.bincount(pattern, minlength=3 ** w)).pvalue > 1e-3


def test_initial_step(rng):
    rep = propagate_weight_stats(Connectivity.all_to_all(6), 3, trials=2000, rng=rng)
    assert rep.mean_weight[0] == 1 and np.all(rep.K[:, 0] == 1)
    assert np.all((rep.K >= 0) & (rep.K <= 1)) and np.all(rep.K_upper >= rep.K)


def test_fresh_partner_mean_weight(rng):
    trials = 100_000
    rep = propagate_weight_stats(Connectivity.all_to_all(30), 1, trials=trials, rng=rng, starts=[(0, 1)])
    assert abs(rep.mean_weight[1] - 5 / 3) < 3 * rep.mean_weight_se[1]


def test_all_to_all_grows_faster(rng):
    n = 30
    kw = dict(trials=2000, rng=rng, starts=[(0, 1), (7, 3)])
    full = propagate_weight_stats(Connectivity.all_to_all(n), 40, **kw)
    ring = propagate_weight_stats(Connectivity.ring(n), 40, **kw)
    assert np.all(full.mean_weight[2:6] > ring.mean_weight[2:6])
    assert abs(full.mean_weight[-1] - 3 * n / 4) < 1.0
    assert ring.mean_weight[-1] < full.mean_weight[-1]


def test_correlated_ring_delocalizes_faster(rng):
    n = 30
    kw = dict(trials=4000, rng=rng, starts=[(0, 1), (0, 2), (5, 3)])
    plain = propagate_weight_stats(Connectivity.ring(n), 12, **kw)
    corr = propagate_weight_stats(Connectivity.ring(n), 12, correlated=True, **kw)
    sigma = np.sqrt(0.25 / 4000)
    assert np.all(corr.K[2, 4:] <= plain.K[2, 4:] + 3 * sigma)


def test_k_delocal(rng):
    rep = propagate_weight_stats(Connectivity.all_to_all(30), 12, trials=5000, rng=rng, starts=[(0, 1)])
    assert k_delocal(rep, 1.0) == 0
    kd = k_delocal(rep, 0.05)
    assert 1 <= kd <= 9
    with pytest.raises(ValueError):
        k_delocal(rep, 1e-9)
    summary = rep.summary(0.05, epsilon=0.01)
    assert summary["k_delocal"] == kd and summary["verdict"] == "reliable"
    rows = list(csv.reader(io.StringIO(rep.to_csv())))
    assert rows[0][:6] == ["k", "E[W]", "E[W]_se", "K(1,k)", "K(2,k)", "K(3,k)"] and len(rows) == 14


def test_verdicts():
    assert reliability_verdict(0.01, 6) == "reliable"
    assert reliability_verdict(0.2, 6) == "not guaranteed"
    assert reliability_verdict(0.5, 0) == "reliable"
    assert per_qubit_condition([0.01, 0.3], 6) == "not guaranteed"


def test_wilson_interval():
    lo, hi = wilson_interval(np.array([0, 50, 100]), 100)
    assert lo[0] == 0 and hi[2] == 1 and lo[1] < 0.5 < hi[1]
    # compare with the closed form at one point
    zq = 1.959963984540054
    p, n = 0.3, 200
    centre = (p + zq ** 2 / (2 * n)) / (1 + zq ** 2 / n)
    half = zq * np.sqrt(p * (1 - p) / n + zq ** 2 / (4 * n * n)) / (1 + zq ** 2 / n)
    lo, hi = wilson_interval(60, 200)
    assert np.isclose(lo, centre - half) and np.isclose(hi, centre + half)


def test_weights_helper():
    x = np.array([[1, 0, 0], [0, 0, 0]], dtype=np.uint8)
    z = np.array([[1, 1, 0], [0, 0, 0]], dtype=np.uint8)
    assert list(weights(x, z)) == [2, 0]
