"""Simulating RB circuit suites under error models.

``run_unraveled`` samples stochastic Pauli faults after each layer and pushes
them to the end of the circuit with the sign-free symplectic action of the
layers.  The ideal output of an RB circuit is a computational basis state, so
a shot succeeds exactly when the accumulated fault has no X component.
``run_exact`` evolves dense PTMs and is the oracle for small registers.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .clifford import layer_symplectic
from .noise import ErrorModel
from .pauli import index_bits
from .protocol import RbCircuit, RbDataset
from .superop import ptm_of_unitary, state_vector

MAX_EXACT_QUBITS = 3


@dataclass
class RunResult:
    """Per-circuit outcomes of a simulated suite.

    ``records`` hold id, d, target, shots, successes and ``p`` (the success
    frequency, or the exact probability when ``exact`` is set).  ``classes``
    maps circuit id to the shot counts (no fault, cancelled fault, surviving
    fault that still succeeded, surviving fault) when bookkeeping is on.
    """

    n: int
    records: list
    seed: int | None
    exact: bool = False
    classes: dict | None = None
    metadata: dict = field(default_factory=dict)

    def mean_success(self) -> tuple[np.ndarray, np.ndarray]:
        groups: dict = {}
        for r in self.records:
            groups.setdefault(int(r["d"]), []).append(r["p"])
        d = np.array(sorted(groups))
        return d, np.array([np.mean(groups[k]) for k in d])

    def to_dataset(self) -> RbDataset:
        """Dataset view; exact runs store the probability as a one-shot expectation."""
        recs = []
        for r in self.records:
            if self.exact:
                recs.append({"id": r["id"], "d": r["d"], "target": r["target"], "shots": 1,
                             "successes": float(r["p"])})
            else:
                recs.append({k: r[k] for k in ("id", "d", "target", "shots", "successes")})
        meta = dict(self.metadata, seed=self.seed, exact=self.exact)
        return RbDataset(self.n, recs, meta)


def _noisy_mask(c: RbCircuit, model: ErrorModel) -> np.ndarray:
    n_layers = len(c.circuit.layers)
    mask = np.ones(n_layers, dtype=bool)
    if model.sspam_mode == "perfect":
        mask[: c.n_sp] = False
        mask[c.n_sp + c.n_core:] = False
    return mask


def _sample_factor(probs: np.ndarray, size, rng: np.random.Generator) -> np.ndarray:
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    return np.searchsorted(cdf, rng.random(size), side="right")


def _layer_faults(model: ErrorModel, layer, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Symplectic fault vectors (shots, 2n) after one layer."""
    n = model.n
    out = np.zeros((shots, 2 * n), dtype=np.uint8)
    if model.kind == "global_depolarizing":
        # with probability 1 - lam the register is hit by a uniformly random Pauli
        hit = rng.random(shots) < 1.0 - model.params["lam"]
        out[hit] = rng.integers(0, 2, (int(hit.sum()), 2 * n), dtype=np.uint8)
        return out
    for f in model.layer_factors(layer):
        k = len(f.qubits)
        bits = index_bits(_sample_factor(f.probs, shots, rng), k)
        q = list(f.qubits)
        out[:, q] ^= bits[:, :k]
        out[:, [n + j for j in q]] ^= bits[:, k:]
    return out


class _SymplecticCache:
    def __init__(self, n: int):
        self.n = n
        self.store: dict = {}

    def __call__(self, layer) -> np.ndarray:
        m = self.store.get(layer)
        if m is None:
            m = layer_symplectic(layer, self.n).T.astype(np.int64)
            self.store[layer] = m
        return m


def simulate_circuit(c: RbCircuit, model: ErrorModel, shots: int, rng: np.random.Generator,
                     cache: _SymplecticCache | None = None) -> tuple[int, tuple[int, int, int, int]]:
    """Unravel one circuit for ``shots`` shots.

    Returns the success count and the shot counts of the four fault classes:
    no fault, faults whose product cancels, a surviving fault that leaves the
    target unchanged, and a surviving fault that flips it.
    """
    n = c.n
    cache = cache or _SymplecticCache(n)
    mask = _noisy_mask(c, model)
    acc = np.zeros((shots, 2 * n), dtype=np.int64)
    faulted = np.zeros(shots, dtype=bool)
    started = False
    for layer, noisy in zip(c.circuit.layers, mask):
        if started:
            acc = (acc @ cache(layer)) & 1
        if noisy:
            f = _layer_faults(model, layer, shots, rng)
            faulted |= f.any(axis=1)
            acc ^= f
            started = True
    flips = acc[:, :n].any(axis=1)
    if model.readout_flip > 0:
        ro = rng.random((shots, n)) < model.readout_flip
        flips = (acc[:, :n] ^ ro).any(axis=1)
    net_nonzero = acc.any(axis=1)
    n1 = int((~faulted).sum())
    n2 = int((faulted & ~net_nonzero).sum())
    n3 = int((net_nonzero & ~flips).sum())
    n4 = int((net_nonzero & flips).sum())
    successes = int((~flips).sum())
    return successes, (n1, n2, n3, n4)


def _circuit_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def run_unraveled(circuits: Sequence[RbCircuit], model: ErrorModel, shots: int, seed: int,
                  bookkeeping: bool = False, threads: int = 1) -> RunResult:
    """Monte Carlo run of a suite under a stochastic Pauli model.

    Circuit ``i`` draws from its own stream derived from ``seed`` and ``i``,
    so results do not depend on ``threads``.
    """
    if not model.is_stochastic:
        raise ValueError(f"{model.kind} models cannot be unraveled into Pauli faults")
    if circuits and circuits[0].n != model.n:
        raise ValueError("model and suite act on different numbers of qubits")
    if shots < 1:
        raise ValueError("shots must be positive")

    def work(i: int):
        cache = _SymplecticCache(circuits[i].n)
        return simulate_circuit(circuits[i], model, shots, _circuit_rng(seed, i), cache)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(work, range(len(circuits))))
    else:
        results = [work(i) for i in range(len(circuits))]
    records, classes = [], {}
    for c, (succ, cls) in zip(circuits, results):
        records.append({"id": c.id, "d": c.d, "target": c.target, "shots": shots, "successes": succ,
                        "p": succ / shots})
        classes[c.id] = cls
    return RunResult(model.n, records, seed, False, classes if bookkeeping else None,
                     {"model": model.kind, "sspam_mode": model.sspam_mode,
                      "readout_flip": model.readout_flip})


# ---------------------------------------------------------------------------
# dense oracle

def _readout_effect(n: int, target: str, flip: float) -> np.ndarray:
    if flip == 0:
        return state_vector(n, target)
    eff = np.zeros(4 ** n)
    for k in range(2 ** n):
        bits = format(k, f"0{n}b")
        nflip = sum(a != b for a, b in zip(bits, target))
        eff += flip ** nflip * (1 - flip) ** (n - nflip) * state_vector(n, bits)
    return eff


def exact_success(c: RbCircuit, model: ErrorModel, cache: dict | None = None) -> float:
    n = c.n
    if n > MAX_EXACT_QUBITS:
        raise ValueError(f"dense evolution is capped at {MAX_EXACT_QUBITS} qubits")
    cache = {} if cache is None else cache
    rho = state_vector(n)
    for layer, noisy in zip(c.circuit.layers, _noisy_mask(c, model)):
        key = (layer, bool(noisy))
        m = cache.get(key)
        if m is None:
            m = ptm_of_unitary(tuple(layer), n).m
            if noisy:
                m = model.layer_error_ptm(layer).m @ m
            cache[key] = m
        rho = m @ rho
    return float(_readout_effect(n, c.target, model.readout_flip) @ rho)


def run_exact(circuits: Sequence[RbCircuit], model: ErrorModel) -> RunResult:
    """Exact success probabilities by dense PTM evolution (n <= 3)."""
    if circuits and circuits[0].n > MAX_EXACT_QUBITS:
        raise ValueError(f"dense evolution is capped at {MAX_EXACT_QUBITS} qubits")
    cache: dict = {}
    records = []
    for c in circuits:
        p = exact_success(c, model, cache)
        records.append({"id": c.id, "d": c.d, "target": c.target, "p": p})
    return RunResult(model.n, records, None, True, None, {"model": model.kind, "sspam_mode": model.sspam_mode})


# ---------------------------------------------------------------------------
# success decomposition

@dataclass
class Decomposition:
    depths: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    s3: np.ndarray
    s1_sigma: np.ndarray
    s3_sigma: np.ndarray
    success: np.ndarray
    counts: np.ndarray  # per depth: shots, no fault, cancelled, surviving-success, surviving-fail

    def reconstructed(self) -> np.ndarray:
        return self.s1 + (1 - self.s1) * self.s2 + (1 - self.s1) * (1 - self.s2) * self.s3


def _ratio(a: float, b: float) -> float:
    # empty conditioning events contribute nothing to the reconstruction, so 0 is safe
    return a / b if b > 0 else 0.0


def decompose_success(run: RunResult) -> Decomposition:
    """Per-depth estimates of the no-fault, cancellation and lucky-survival probabilities.

    ``s1`` is the fraction of shots with no fault, ``s2`` the fraction of
    faulted shots whose faults cancel, and ``s3`` the fraction of shots with a
    surviving fault that still return the target.
    """
    if run.classes is None:
        raise ValueError("run was made without fault bookkeeping")
    if run.metadata.get("readout_flip", 0):
        raise ValueError("readout flips are not part of the fault bookkeeping")
    per: dict = {}
    for r in run.records:
        row = per.setdefault(int(r["d"]), np.zeros(6))
        row[0] += r["shots"]
        row[1:5] += run.classes[r["id"]]
        row[5] += r["successes"]
    depths = np.array(sorted(per))
    rows = np.array([per[d] for d in depths])
    tot, n1, n2, n3, n4, succ = rows.T
    s1 = n1 / tot
    s2 = np.array([_ratio(a, b) for a, b in zip(n2, tot - n1)])
    m = n3 + n4
    s3 = np.array([_ratio(a, b) for a, b in zip(n3, m)])
    s1_sigma = np.sqrt(s1 * (1 - s1) / tot)
    with np.errstate(invalid="ignore", divide="ignore"):
        s3_sigma = np.sqrt(s3 * (1 - s3) / m)
    return Decomposition(depths, s1, s2, s3, s1_sigma, s3_sigma, succ / tot, rows[:, :5])
