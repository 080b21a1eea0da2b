"""How fast random layers spread a local Pauli error over the register.

Errors are tracked without signs as (x, z) bit arrays of shape (trials, n).
One step is a layer of uniformly random single-qubit Cliffords followed by
the CNOTs of one edge colour of the connectivity graph.  For every step we
record the mean weight and, for w = 1, 2, 3, the probability that the error
still has weight w or less.  The worst case over starting errors is found by
scanning every weight-1 Pauli.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.stats import norm

from .clifford import single_qubit_table
from .connectivity import Connectivity
from .sampling import edge_coloring

DEFAULT_TRIALS = 100_000
LOW_WEIGHTS = (1, 2, 3)
CONFIDENCE = 0.95


@lru_cache(maxsize=None)
def one_qubit_image_table() -> np.ndarray:
    """``table[c, code]`` is the sign-free image of a Pauli under Clifford ``c``.

    Pauli codes are ``x | (z << 1)``: I = 0, X = 1, Z = 2, Y = 3.
    """
    elems = single_qubit_table().elements
    table = np.zeros((len(elems), 4), dtype=np.uint8)
    for i, c in enumerate(elems):
        for code in range(4):
            v = np.array([code & 1, code >> 1], dtype=np.uint8)
            img = (c.s.astype(np.int64) @ v) & 1
            table[i, code] = img[0] | (img[1] << 1)
    return table


def apply_random_oneq_layer(x: np.ndarray, z: np.ndarray, rng: np.random.Generator) -> None:
    table = one_qubit_image_table()
    c = rng.integers(0, table.shape[0], x.shape)
    code = table[c, x | (z << 1)]
    x[:] = code & 1
    z[:] = code >> 1


def apply_cnot(x: np.ndarray, z: np.ndarray, control: int, target: int, rows=slice(None)) -> None:
    """Sign-free CNOT conjugation: X spreads control to target, Z spreads target to control."""
    x[rows, target] ^= x[rows, control]
    z[rows, control] ^= z[rows, target]


def weights(x: np.ndarray, z: np.ndarray) -> np.ndarray:
    return (x | z).sum(axis=1)


def wilson_interval(k, n, confidence: float = CONFIDENCE):
    """Wilson score interval for ``k`` successes in ``n`` trials (vectorized)."""
    k = np.asarray(k, dtype=float)
    zq = norm.ppf(0.5 + confidence / 2)
    phat = k / n
    denom = 1 + zq ** 2 / n
    centre = (phat + zq ** 2 / (2 * n)) / denom
    half = zq * np.sqrt(phat * (1 - phat) / n + zq ** 2 / (4 * n * n)) / denom
    # the bounds are exactly 0 and 1 at the endpoints; pin them against rounding
    lo = np.where(k == 0, 0.0, np.clip(centre - half, 0.0, 1.0))
    hi = np.where(k == n, 1.0, np.clip(centre + half, 0.0, 1.0))
    return lo, hi


def _colour_classes(conn: Connectivity) -> list:
    if not conn.edges:
        return []
    return edge_coloring(conn)


def propagate_start(conn: Connectivity, start: tuple[int, int], k_max: int, trials: int,
                    rng: np.random.Generator, correlated: bool = False):
    """Propagate one weight-1 start ``(qubit, code)`` for ``k_max`` steps.

    Returns ``(weight_sum, weight_sq_sum, low_counts)`` per step ``k = 0..k_max``
    where ``low_counts[w-1, k]`` counts trials with weight at most ``w``.
    """
    n = conn.n
    qubit, code = start
    if not (0 <= qubit < n) or code not in (1, 2, 3):
        raise ValueError(f"bad weight-1 start {start}")
    classes = _colour_classes(conn)
    x = np.zeros((trials, n), dtype=np.uint8)
    z = np.zeros((trials, n), dtype=np.uint8)
    x[:, qubit] = code & 1
    z[:, qubit] = code >> 1
    wsum = np.zeros(k_max + 1)
    wsq = np.zeros(k_max + 1)
    low = np.zeros((len(LOW_WEIGHTS), k_max + 1), dtype=np.int64)
    phase = rng.integers(0, max(len(classes), 1), trials) if correlated else None

    def record(k):
        w = weights(x, z)
        wsum[k] = w.sum()
        wsq[k] = (w.astype(float) ** 2).sum()
        for i, lw in enumerate(LOW_WEIGHTS):
            low[i, k] = int((w <= lw).sum())

    record(0)
    for k in range(1, k_max + 1):
        apply_random_oneq_layer(x, z, rng)
        if classes:
            if correlated:
                colour = (phase + k - 1) % len(classes)
            else:
                colour = rng.integers(0, len(classes), trials)
            for ci, edges in enumerate(classes):
                rows = np.flatnonzero(colour == ci)
                if rows.size == 0:
                    continue
                for a, b in edges:
                    apply_cnot(x, z, a, b, rows)
        record(k)
    return wsum, wsq, low


@dataclass
class ScramblingReport:
    n: int
    connectivity: str
    ks: np.ndarray
    mean_weight: np.ndarray
    mean_weight_se: np.ndarray
    K: np.ndarray  # (3, len(ks)) worst case over starts of P[weight <= w]
    K_upper: np.ndarray  # Wilson upper bound of the worst start
    trials: int
    starts: list = field(default_factory=list)
    correlated: bool = False

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "E[W]", "E[W]_se", "K(1,k)", "K(2,k)", "K(3,k)", "K(1,k)_upper", "K(2,k)_upper",
                    "K(3,k)_upper"])
        for j, k in enumerate(self.ks):
            w.writerow([int(k), f"{self.mean_weight[j]:.10g}", f"{self.mean_weight_se[j]:.3g}"]
                       + [f"{v:.10g}" for v in self.K[:, j]] + [f"{v:.10g}" for v in self.K_upper[:, j]])
        return buf.getvalue()

    def summary(self, delta: float, epsilon: float | None = None, w: int = 3) -> dict:
        out = {"n": self.n, "connectivity": self.connectivity, "correlated": self.correlated,
               "trials_per_start": self.trials, "starts": len(self.starts), "delta_delocal": delta, "w": w}
        try:
            kd = k_delocal(self, delta, w)
        except ValueError as exc:
            out.update(k_delocal=None, note=str(exc))
            return out
        out["k_delocal"] = kd
        if epsilon is not None:
            out["epsilon"] = epsilon
            out["verdict"] = reliability_verdict(epsilon, kd)
        return out

    def to_json(self, delta: float, epsilon: float | None = None) -> str:
        return json.dumps(self.summary(delta, epsilon), indent=2)


def propagate_weight_stats(conn: Connectivity, k_max: int, trials: int = DEFAULT_TRIALS,
                           rng: np.random.Generator | None = None, correlated: bool = False,
                           starts: list | None = None) -> ScramblingReport:
    """Monte Carlo weight statistics, maximized over weight-1 starting errors.

    ``starts`` defaults to all ``3 n`` weight-1 Paulis.  The mean weight is
    averaged over the starts; ``K`` takes the worst start at each step.
    """
    if k_max < 0 or trials < 1:
        raise ValueError("k_max must be non-negative and trials positive")
    rng = np.random.default_rng() if rng is None else rng
    _colour_classes(conn)  # fail early on graphs that are not handled
    starts = starts if starts is not None else [(q, c) for q in range(conn.n) for c in (1, 2, 3)]
    wsum = np.zeros(k_max + 1)
    wsq = np.zeros(k_max + 1)
    K = np.zeros((len(LOW_WEIGHTS), k_max + 1))
    K_up = np.zeros_like(K)
    for s in starts:
        ws, wq, low = propagate_start(conn, s, k_max, trials, rng, correlated)
        wsum += ws
        wsq += wq
        frac = low / trials
        _, up = wilson_interval(low, trials)
        K = np.maximum(K, frac)
        # the largest upper bound over starts bounds the worst case at the same confidence per start
        K_up = np.maximum(K_up, up)
    total = trials * len(starts)
    mean = wsum / total
    var = np.maximum(wsq / total - mean ** 2, 0.0)
    return ScramblingReport(conn.n, conn.label, np.arange(k_max + 1), mean, np.sqrt(var / total), K, K_up,
                            trials, list(starts), correlated)


def k_delocal(report: ScramblingReport, delta: float, w: int = 3) -> int:
    """Smallest k whose upper confidence bound on K(w, k) is below ``delta``."""
    if w not in LOW_WEIGHTS:
        raise ValueError(f"w must be one of {LOW_WEIGHTS}")
    if delta >= 1:
        return 0
    below = np.flatnonzero(report.K_upper[w - 1] < delta)
    if below.size == 0:
        raise ValueError(f"K({w}, k) stays above {delta} up to k = {int(report.ks[-1])}")
    return int(report.ks[below[0]])


def reliability_verdict(epsilon: float, kd: int) -> str:
    """``reliable`` when the error rate is below one error per delocalization time."""
    if kd == 0 or epsilon < 1.0 / kd:
        return "reliable"
    return "not guaranteed"


def per_qubit_condition(rates, kd: int) -> str:
    """The same test applied to the largest per-qubit rate of a tensor-product model."""
    return reliability_verdict(float(np.max(rates)), kd)


# ---------------------------------------------------------------------------
# single-gate transition laws

def _weight1_on_pair() -> list:
    return [(c, 0) for c in (1, 2, 3)] + [(0, c) for c in (1, 2, 3)]


def _weight2_on_pair() -> list:
    return [(a, b) for a in (1, 2, 3) for b in (1, 2, 3)]


def cnot_transition_frequencies(trials: int, rng: np.random.Generator) -> dict:
    """Empirical weight changes under one CNOT on uniformly drawn inputs.

    ``spread``: fraction of weight-1 inputs on the pair that leave with weight 2.
    ``recombine``: fraction of weight-2 inputs on the pair that leave with weight 1.
    Counts are returned alongside so callers can form binomial errors.
    """
    out = {}
    for name, pool, target_w in (("spread", _weight1_on_pair(), 2), ("recombine", _weight2_on_pair(), 1)):
        codes = np.array(pool, dtype=np.uint8)[rng.integers(0, len(pool), trials)]
        x = (codes & 1).astype(np.uint8)
        z = (codes >> 1).astype(np.uint8)
        apply_cnot(x, z, 0, 1)
        hits = int((weights(x, z) == target_w).sum())
        out[name] = hits / trials
        out[name + "_count"] = hits
    out["trials"] = trials
    return out


def exact_transition_table() -> dict:
    """Exhaustive enumeration of the same two laws."""
    res = {}
    for name, pool, target_w in (("spread", _weight1_on_pair(), 2), ("recombine", _weight2_on_pair(), 1)):
        codes = np.array(pool, dtype=np.uint8)
        x, z = codes & 1, codes >> 1
        apply_cnot(x, z, 0, 1)
        res[name] = (int((weights(x, z) == target_w).sum()), len(pool))
    return res


def binomial_sigma(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1 - p), 1e-300) / trials)
