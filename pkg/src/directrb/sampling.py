"""Sampling distributions over n-qubit layers.

The edge grab sampler draws one layer of parallel one- and two-qubit gates
with a tunable expected two-qubit gate density.  The ``G4`` family draws a
layer of uniformly random single-qubit Cliffords followed by all CNOTs of one
colour of an edge colouring.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuit import Gate
from .connectivity import Connectivity

MAX_EDGE_GRAB_RETRIES = 1000


class SamplerError(ValueError):
    pass


def _fixed(name):
    return lambda q, rng: Gate(name, (q,))


def _z_theta(q, rng):
    return Gate("Z", (q,), (float(rng.uniform(0.0, 2 * math.pi)),))


# one-qubit pools: name -> list of factories (q, rng) -> Gate, sampled uniformly
POOLS = {
    "clifford24": [_fixed(f"C{k}") for k in range(24)],
    "x90_y90_i": [_fixed("X90"), _fixed("Y90"), _fixed("I")],
    "x90_y90": [_fixed("X90"), _fixed("Y90")],
    "h_s_i": [_fixed("H"), _fixed("S"), _fixed("I")],
    "h_s": [_fixed("H"), _fixed("S")],
    "x90_z": [_fixed("X90"), _z_theta],
}
CONTINUOUS_POOLS = {"x90_z"}


def edge_grab_sample(conn: Connectivity, xi_bar: float, oneq_pool: str | Sequence = "clifford24",
                     rng: np.random.Generator | None = None, twoq_gate: str = "CNOT",
                     directed: bool = False):
    """Draw one layer with the edge grab algorithm.

    A candidate set of disjoint edges is built greedily from the edges in a
    random order; each candidate is then kept with probability
    ``n * xi_bar / (2 |E_c|)``.  If that probability exceeds one, a new
    candidate set is drawn.  Qubits left over get a uniformly random gate from
    the one-qubit pool.  Unless ``directed`` is set, each kept edge gets a
    uniformly random control/target orientation.
    """
    if rng is None:
        raise ValueError("an explicit rng is required")
    if xi_bar < 0:
        raise SamplerError("xi_bar must be nonnegative")
    n = conn.n
    pool = POOLS[oneq_pool] if isinstance(oneq_pool, str) else list(oneq_pool)
    edges = list(conn.edges)
    chosen: list = []
    if xi_bar > 0:
        for _ in range(MAX_EDGE_GRAB_RETRIES):
            used: set = set()
            candidates = []
            for e in rng.permutation(len(edges)) if edges else []:
                a, b = edges[int(e)]
                if a not in used and b not in used:
                    candidates.append((a, b))
                    used.update((a, b))
            if candidates and n * xi_bar / (2 * len(candidates)) <= 1.0:
                break
        else:
            raise SamplerError(f"xi_bar={xi_bar} is not achievable on this connectivity")
        keep = n * xi_bar / (2 * len(candidates))
        for a, b in candidates:
            if rng.random() < keep:
                if not directed and rng.random() < 0.5:
                    a, b = b, a
                chosen.append(Gate(twoq_gate, (a, b)))
    busy = {q for g in chosen for q in g.qubits}
    oneq = [pool[int(rng.integers(len(pool)))](q, rng) for q in range(n) if q not in busy]
    return tuple(chosen + oneq)


def two_qubit_density(layer, n: int) -> float:
    return 2.0 * sum(1 for g in layer if g.is_two_qubit) / n


def edge_coloring(conn: Connectivity) -> list[list[tuple]]:
    """Partition the edges into colour classes of disjoint edges.

    Complete graphs on an even number of qubits use the round-robin
    one-factorization; otherwise edges are coloured greedily in a fixed order.
    Raises if the colouring needs more colours than the maximum degree, which
    means the graph is not handled as an alpha-regular alpha-colourable graph.
    """
    n = conn.n
    degree = max((d for _, d in conn.graph.degree()), default=0)
    if conn.is_complete() and n % 2 == 0 and n >= 2:
        classes = []
        others = list(range(1, n))
        for rnd in range(n - 1):
            ring = [0] + others[rnd:] + others[:rnd]
            classes.append(sorted(tuple(sorted((ring[i], ring[n - 1 - i]))) for i in range(n // 2)))
        return classes
    colour_of: dict = {}
    for a, b in sorted(tuple(sorted(e)) for e in conn.edges):
        taken = {c for e, c in colour_of.items() if a in e or b in e}
        c = 0
        while c in taken:
            c += 1
        colour_of[(a, b)] = c
    ncol = max(colour_of.values(), default=-1) + 1
    if ncol > degree:
        raise SamplerError(f"greedy colouring needs {ncol} colours for a degree-{degree} graph")
    return [[e for e, c in colour_of.items() if c == k] for k in range(ncol)]


@dataclass
class SamplingDistribution:
    """A distribution Omega over layers.

    kinds:
      ``edge_grab``         params: xi_bar, pool, twoq_gate, directed
      ``uniform_layerset``  params: family in {G2, G3, G4}, correlated (G4 only), xi_bar, pool
      ``custom_weighted``   params: layers (list of layers), weights
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("edge_grab", "uniform_layerset", "custom_weighted"):
            raise ValueError(f"unknown sampler kind {self.kind!r}")
        if self.kind == "custom_weighted":
            w = np.asarray(self.params["weights"], dtype=float)
            if np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
                raise ValueError("custom weights must be a probability vector")

    @property
    def family(self) -> str | None:
        return self.params.get("family")

    def is_clifford(self) -> bool:
        return self.params.get("pool", "clifford24") not in CONTINUOUS_POOLS

    def sample(self, conn: Connectivity, rng: np.random.Generator, position: int = 0, phase: int = 0):
        """Draw one layer.  ``position``/``phase`` drive correlated G4 colour alternation."""
        p = self.params
        if self.kind == "edge_grab":
            return edge_grab_sample(conn, p.get("xi_bar", 0.25), p.get("pool", "clifford24"), rng,
                                    p.get("twoq_gate", "CNOT"), p.get("directed", False))
        if self.kind == "custom_weighted":
            k = rng.choice(len(p["layers"]), p=p["weights"])
            return tuple(p["layers"][int(k)])
        return uniform_layer_sample(p.get("family", "G4"), conn, rng,
                                    correlated=p.get("correlated", False), position=position, phase=phase,
                                    xi_bar=p.get("xi_bar", 0.25), pool=p.get("pool"))

    def sample_layers(self, conn: Connectivity, depth: int, rng: np.random.Generator) -> list:
        phase = int(rng.integers(2)) if self.params.get("correlated") else 0
        return [self.sample(conn, rng, position=i, phase=phase) for i in range(depth)]

    def enumerate(self, n: int) -> list[tuple[tuple, float]]:
        """Exact (layer, probability) list for single-qubit samplers.

        Only finite one-qubit distributions are supported; these are what the
        design and theory modules need.
        """
        if self.kind == "custom_weighted":
            return [(tuple(layer), float(w)) for layer, w in zip(self.params["layers"], self.params["weights"])]
        if n != 1:
            raise ValueError("exact enumeration is implemented for n = 1 only")
        pool_name = self.params.get("pool", "clifford24")
        if self.kind == "uniform_layerset" and self.family == "G4":
            pool_name = "clifford24"
        if pool_name in CONTINUOUS_POOLS:
            raise ValueError("continuous pools cannot be enumerated")
        pool = POOLS[pool_name]
        return [((f(0, None),), 1.0 / len(pool)) for f in pool]

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": self.params}


def uniform_layer_sample(gateset_family: str, conn: Connectivity, rng: np.random.Generator, *,
                         correlated: bool = False, position: int = 0, phase: int = 0,
                         xi_bar: float = 0.25, pool: str | None = None):
    """Draw a layer from one of the example gate-set families.

    ``G2``: CNOTs plus H/S/I one-qubit gates via edge grab.
    ``G3``: CNOTs plus the 24 single-qubit Cliffords via edge grab.
    ``G4``: uniformly random single-qubit Cliffords on every qubit, followed by
    all CNOTs of one edge colour.  The colour is uniform, or with
    ``correlated`` it alternates with ``position`` (offset by ``phase``).
    """
    if gateset_family == "G2":
        return edge_grab_sample(conn, xi_bar, pool or "h_s_i", rng)
    if gateset_family == "G3":
        return edge_grab_sample(conn, xi_bar, pool or "clifford24", rng)
    if gateset_family != "G4":
        raise ValueError(f"unknown gate-set family {gateset_family!r}")
    colours = _cached_coloring(conn)
    l1 = tuple(Gate(f"C{int(k)}", (q,)) for q, k in enumerate(rng.integers(0, 24, conn.n)))
    if not colours:
        return l1
    if correlated:
        c = (position + phase) % len(colours)
    else:
        c = int(rng.integers(len(colours)))
    l2 = tuple(Gate("CNOT", e) for e in colours[c])
    return l1 + l2


_COLOUR_CACHE: dict = {}


def _cached_coloring(conn: Connectivity):
    key = (conn.n, conn.edges)
    if key not in _COLOUR_CACHE:
        _COLOUR_CACHE[key] = edge_coloring(conn)
    return _COLOUR_CACHE[key]
