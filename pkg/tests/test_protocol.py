import json

import numpy as np
import pytest
from scipy.stats import chisquare

from directrb.circuit import Circuit, Gate, circuit_unitary
from directrb.clifford import compose, net_clifford
from directrb.connectivity import Connectivity
from directrb.engine import run_exact, run_unraveled
from directrb.noise import global_depolarizing, local_depolarizing
from directrb.protocol import (ExperimentDesign, RbDataset, canonical_hash, generate_clifford_rb,
                               generate_direct_rb, read_suite, write_suite)
from directrb.sampling import SamplingDistribution


def dense_success(c):
    # state-vector oracle for |<target| U |0>|^2
    return abs(circuit_unitary(c.circuit)[int(c.target, 2), 0]) ** 2


def test_depth_zero_and_dense_check():
    design = ExperimentDesign(3, depths=(0, 1, 3), K_d=6, rng_seed=4)
    for c in generate_direct_rb(design, Connectivity.ring(3)):
        assert abs(dense_success(c) - 1) < 1e-10
        sp, core, mp = c.parts()
        assert len(core) == c.d
        if c.d == 0:
            assert c.circuit.layers == sp + mp


@pytest.mark.parametrize("mode", ["conditional", "unconditional"])
def test_direct_rb_compilation_modes(mode):
    design = ExperimentDesign(2, depths=(0, 2, 5), K_d=5, rng_seed=1, sp_compilation=mode)
    for c in generate_direct_rb(design):
        assert abs(dense_success(c) - 1) < 1e-10


def test_partition_integrity():
    design = ExperimentDesign(4, depths=(0, 4), K_d=3, rng_seed=2)
    for c in generate_direct_rb(design, Connectivity.linear(4)):
        sp, core, mp = c.parts()
        assert Circuit(4, sp + core + mp).layers == c.circuit.layers
        assert len(sp) == c.n_sp and len(mp) == c.n_mp


def test_targets_uniform():
    design = ExperimentDesign(2, depths=(0,), K_d=2000, rng_seed=7)
    counts = np.zeros(4)
    for c in generate_direct_rb(design):
        counts[int(c.target, 2)] += 1
    assert chisquare(counts).pvalue > 1e-3
    fixed = ExperimentDesign(2, depths=(0,), K_d=20, randomize_target=False)
    assert {c.target for c in generate_direct_rb(fixed)} == {"00"}


def test_core_marginal_matches_omega():
    layers = [(Gate("H", (0,)),), (Gate("S", (0,)),), (Gate("I", (0,)),)]
    w = [0.5, 0.25, 0.25]
    om = SamplingDistribution("custom_weighted", {"layers": layers, "weights": w})
    design = ExperimentDesign(1, depths=(100,), K_d=100, omega=om, rng_seed=3)
    counts = np.zeros(3)
    for c in generate_direct_rb(design):
        for layer in c.parts()[1]:
            counts[layers.index(tuple(layer))] += 1
    assert counts.sum() == 10_000
    assert chisquare(counts, np.array(w) * 10_000).pvalue > 1e-3


def test_clifford_rb_examples():
    design = ExperimentDesign(2, depths=(0, 1, 3), K_d=4, rng_seed=5, randomize_target=False)
    for c in generate_clifford_rb(design):
        assert abs(dense_success(c) - 1) < 1e-10
        if c.d == 0:
            sp, core, mp = c.parts()
            assert core == []
            total = compose(net_clifford(Circuit(2, mp)), net_clifford(Circuit(2, sp)))
            assert total == net_clifford(Circuit(2, []))


def test_clifford_rb_loses_more_at_depth_zero():
    # the compiled Clifford blocks are much longer than direct RB's brackets, so with noisy
    # preparation and measurement the depth-0 success drops faster with n
    s0 = {}
    for gen in (generate_direct_rb, generate_clifford_rb):
        for n in (2, 4):
            design = ExperimentDesign(n, depths=(0,), K_d=20, rng_seed=11)
            circs = gen(design, Connectivity.linear(n))
            res = run_unraveled(circs, local_depolarizing(n, 0.01, "noisy"), 400, seed=3)
            s0[gen.__name__, n] = res.mean_success()[1][0]
    drop_direct = s0["generate_direct_rb", 2] - s0["generate_direct_rb", 4]
    drop_clifford = s0["generate_clifford_rb", 2] - s0["generate_clifford_rb", 4]
    assert drop_clifford > drop_direct
    assert s0["generate_clifford_rb", 4] < s0["generate_direct_rb", 4]


def test_asymptote_for_random_targets():
    # a fully depolarizing layer leaves a uniform output, so success is 1/2^n
    design = ExperimentDesign(2, depths=(1, 3), K_d=10, rng_seed=9)
    res = run_exact(generate_direct_rb(design), global_depolarizing(2, 0.0))
    assert np.allclose(res.mean_success()[1], 0.25, atol=1e-12)


def test_suite_round_trip(tmp_path):
    design = ExperimentDesign(2, depths=(0, 2), K_d=3, rng_seed=6)
    circs = generate_direct_rb(design)
    write_suite(tmp_path / "a.jsonl", circs, {"n": 2, "design": design.to_json()})
    header, back = read_suite(tmp_path / "a.jsonl")
    assert [c.to_json() for c in back] == [c.to_json() for c in circs]
    assert ExperimentDesign.from_json(header["design"]).to_json() == design.to_json()
    # same seed gives byte-identical files
    write_suite(tmp_path / "b.jsonl", generate_direct_rb(design), {"n": 2, "design": design.to_json()})
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()
    (tmp_path / "bad.jsonl").write_text(json.dumps({"schema": "other"}) + "\n")
    with pytest.raises(ValueError):
        read_suite(tmp_path / "bad.jsonl")


def test_dataset_round_trip(tmp_path):
    recs = [{"id": "a", "d": 0, "target": "0", "shots": 10, "successes": 9},
            {"id": "b", "d": 2, "target": "1", "shots": 10, "successes": 7}]
    ds = RbDataset(1, recs, {"note": "x"})
    ds.save(tmp_path / "d.jsonl")
    back = RbDataset.load(tmp_path / "d.jsonl")
    assert back.records == recs and back.metadata["note"] == "x"
    assert back.rescaled(3).records[1]["successes"] == 21
    with pytest.raises(ValueError):
        RbDataset(1, [{"id": "c", "d": 0, "target": "0", "shots": 1, "successes": 2}])


def test_design_validation():
    with pytest.raises(ValueError):
        ExperimentDesign(1, depths=(-1,))
    with pytest.raises(ValueError):
        ExperimentDesign(1, K_d=0)
    with pytest.raises(ValueError):
        ExperimentDesign(1, sp_compilation="other")
    assert canonical_hash({"a": 1, "b": 2}) == canonical_hash({"b": 2, "a": 1})
