"""Error models attached to gates and layers.

Stochastic models (``stochastic_pauli``, ``global_depolarizing``,
``local_depolarizing``, ``weighted_local``) describe the error after a layer
as a product of independent Pauli-distributed factors, which the Monte Carlo
engine samples.  ``markovian_generators`` models carry a dense single-qubit
error PTM per gate name and are only usable by the dense engine and theory.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .circuit import Gate
from .pauli import PauliDistribution, depolarizing_distribution, index_bits
from .superop import Ptm, entanglement_infidelity, is_completely_positive, pauli_basis, pauli_channel, tensor

STOCHASTIC_KINDS = ("stochastic_pauli", "global_depolarizing", "local_depolarizing", "weighted_local")
KINDS = STOCHASTIC_KINDS + ("markovian_generators",)
_LOCAL_DEPOL = np.array([1.0, 1 / 3, 1 / 3, 1 / 3])


class ModelCoverageError(KeyError):
    pass


@dataclass(frozen=True)
class Factor:
    """Independent Pauli error on ``qubits``; ``probs`` is dense in IXYZ order."""

    qubits: tuple
    probs: np.ndarray


@dataclass
class WeightProfile:
    """Per-qubit weights ``alpha**i / sum_j alpha**j`` (i = 1..n) and scale ``eps_tilde``."""

    alpha: float
    n: int
    eps_tilde: float

    @property
    def weights(self) -> np.ndarray:
        powers = np.array([self.alpha ** i for i in range(1, self.n + 1)], dtype=float)
        return powers / powers.sum()

    @property
    def rates(self) -> np.ndarray:
        return self.eps_tilde * self.weights

    @property
    def epsilon(self) -> float:
        return float(1.0 - np.prod(1.0 - self.rates))

    @classmethod
    def from_omega1(cls, omega1: float, n: int, epsilon: float) -> "WeightProfile":
        """Profile with first weight ``omega1`` and layer infidelity ``epsilon``.

        ``omega1`` ranges over ``[1/n, 1)``; ``1/n`` is the homogeneous profile.
        """
        from scipy.optimize import brentq

        if not (1.0 / n - 1e-12 <= omega1 < 1.0):
            raise ValueError(f"omega1 must lie in [1/n, 1), got {omega1}")
        if abs(omega1 - 1.0 / n) < 1e-12:
            alpha = 1.0
        else:
            alpha = brentq(lambda a: cls(a, n, 1.0).weights[0] - omega1, 1e-12, 1.0 - 1e-12)
        w = cls(alpha, n, 1.0).weights
        eps_tilde = brentq(lambda e: 1.0 - np.prod(1.0 - e * w) - epsilon, 0.0, 1.0 / w.max())
        return cls(alpha, n, eps_tilde)


@dataclass
class ErrorModel:
    """Error model; see the module docstring for the kinds.

    ``params`` by kind:
      global_depolarizing:  ``lam`` (layer PTM diag(1, lam, ...))
      local_depolarizing:   ``rate`` (per-qubit entanglement infidelity)
      weighted_local:       ``rates`` (one per qubit)
      stochastic_pauli:     ``table`` {(gate name or "*", qubits): dense probs}
      markovian_generators: ``errors`` {gate name: 4x4 error PTM}
    ``sspam_mode`` decides whether preparation/measurement layers are noisy and
    ``readout_flip`` is an optional per-qubit bit-flip probability at readout.
    """

    kind: str
    n: int
    params: dict = field(default_factory=dict)
    sspam_mode: str = "perfect"
    readout_flip: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown error model kind {self.kind!r}")
        if self.sspam_mode not in ("perfect", "noisy"):
            raise ValueError("sspam_mode must be 'perfect' or 'noisy'")
        if self.kind == "global_depolarizing":
            lam = self.params["lam"]
            if not (-1.0 / (4 ** self.n - 1) <= lam <= 1.0):
                raise ValueError("lam outside the completely positive range")
        if self.kind == "stochastic_pauli":
            for key, probs in self.params["table"].items():
                p = np.asarray(probs, dtype=float)
                if np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
                    raise ValueError(f"rates for {key} are not a probability vector")
        if self.kind == "markovian_generators":
            for name, m in self.params["errors"].items():
                e = Ptm(1, m)
                if not e.is_tp:
                    raise ValueError(f"error map for {name} is not trace preserving")

    @property
    def is_stochastic(self) -> bool:
        return self.kind in STOCHASTIC_KINDS

    def with_sspam(self, mode: str) -> "ErrorModel":
        return ErrorModel(self.kind, self.n, self.params, mode, self.readout_flip)

    # -- stochastic factors ------------------------------------------------
    def layer_factors(self, layer) -> list[Factor]:
        """Independent error factors applied after ``layer``."""
        n = self.n
        if self.kind == "global_depolarizing":
            lam = self.params["lam"]
            return [Factor(tuple(range(n)), _global_probs(n, lam))]
        if self.kind == "local_depolarizing":
            rate = self.params["rate"]
            return [Factor((q,), _local_probs(rate)) for q in range(n)]
        if self.kind == "weighted_local":
            return [Factor((q,), _local_probs(r)) for q, r in enumerate(self.params["rates"])]
        if self.kind == "stochastic_pauli":
            return [Factor(g.qubits, self.gate_probs(g)) for g in layer]
        raise ValueError(f"{self.kind} model has no Pauli factors")

    def gate_probs(self, gate: Gate) -> np.ndarray:
        table = self.params["table"]
        for key in ((gate.name, gate.qubits), ("*", gate.qubits), ("*", tuple(sorted(gate.qubits)))):
            if key in table:
                return np.asarray(table[key], dtype=float)
        raise ModelCoverageError(f"no error rates for {gate.name} on {gate.qubits}")

    def layer_distribution(self, layer) -> PauliDistribution:
        """Dense n-qubit Pauli distribution of the layer error (small n only)."""
        return PauliDistribution.from_vector(combine_factors(self.n, self.layer_factors(layer)), self.n)

    def layer_infidelity(self, layer) -> float:
        """Entanglement infidelity of the error after ``layer``."""
        if self.kind == "markovian_generators":
            return entanglement_infidelity(self.layer_error_ptm(layer))
        fid = 1.0
        for f in self.layer_factors(layer):
            fid *= f.probs[0]
        return 1.0 - fid

    # -- dense channels ------------------------------------------------------
    def layer_error_ptm(self, layer) -> Ptm:
        n = self.n
        if self.kind == "markovian_generators":
            errs = self.params["errors"]
            per_qubit = [np.eye(4) for _ in range(n)]
            for g in layer:
                if len(g.qubits) != 1:
                    raise ModelCoverageError("Markovian models cover one-qubit gates only")
                if g.name not in errs:
                    raise ModelCoverageError(f"no error map for gate {g.name}")
                per_qubit[g.qubits[0]] = np.asarray(errs[g.name]) @ per_qubit[g.qubits[0]]
            return tensor(*[Ptm(1, m) for m in per_qubit])
        return pauli_channel(self.layer_distribution(layer))


def load_rate_table(path) -> dict:
    """Read a stochastic-Pauli rate table from CSV.

    Each row is ``gate, qubits, p_0, ..., p_{4**k - 1}`` with ``qubits`` a
    space-separated list and the probabilities in the dense Pauli index order
    of :class:`PauliDistribution`.  ``gate`` may be ``*`` for any gate.  Lines
    starting with ``#`` are skipped.
    """
    table = {}
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                qubits = tuple(int(q) for q in row[1].split())
                probs = np.array([float(v) for v in row[2:]])
            except (IndexError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed rate row ({exc})") from None
            if len(probs) != 4 ** len(qubits):
                raise ValueError(f"{path}:{lineno}: expected {4 ** len(qubits)} probabilities, got {len(probs)}")
            table[(row[0].strip(), qubits)] = probs
    return table


def save_rate_table(table: dict, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for (name, qubits), probs in table.items():
            w.writerow([name, " ".join(str(q) for q in qubits)] + [repr(float(p)) for p in probs])


def error_channel(model: ErrorModel, gate):
    """Error after ``gate`` (a Gate or a layer tuple).

    Stochastic models give a :class:`PauliDistribution`, Markovian models a PTM.
    """
    layer = (gate,) if isinstance(gate, Gate) else tuple(gate)
    if model.kind == "markovian_generators":
        if isinstance(gate, Gate):
            errs = model.params["errors"]
            if gate.name not in errs:
                raise ModelCoverageError(f"no error map for gate {gate.name}")
            return Ptm(1, errs[gate.name])
        return model.layer_error_ptm(layer)
    if model.kind == "stochastic_pauli" and isinstance(gate, Gate):
        return PauliDistribution.from_vector(model.gate_probs(gate), len(gate.qubits))
    return model.layer_distribution(layer)


@lru_cache(maxsize=64)
def _global_cached(n: int, lam: float) -> np.ndarray:
    return depolarizing_distribution(n, 1.0 - lam).dense()


def _global_probs(n: int, lam: float) -> np.ndarray:
    return _global_cached(n, float(lam))


def _local_probs(rate: float) -> np.ndarray:
    return np.array([1.0 - rate, rate / 3, rate / 3, rate / 3])


def combine_factors(n: int, factors: Sequence[Factor]) -> np.ndarray:
    """Dense distribution over n-qubit Paulis from independent factors."""
    full_bits = index_bits(np.arange(4 ** n), n)
    keys = _bits_to_key(full_bits)
    dist = np.zeros(4 ** n)
    dist[0] = 1.0
    for f in factors:
        k = len(f.qubits)
        local_bits = index_bits(np.arange(4 ** k), k)
        emb = np.zeros((4 ** k, 2 * n), dtype=np.uint8)
        for i, q in enumerate(f.qubits):
            emb[:, q] = local_bits[:, i]
            emb[:, n + q] = local_bits[:, k + i]
        new = np.zeros(4 ** n)
        for j, pj in enumerate(f.probs):
            if pj == 0:
                continue
            shifted = _bits_to_key(full_bits ^ emb[j])
            new[_perm(keys, shifted)] += pj * dist
        dist = new
    return dist


def _bits_to_key(bits: np.ndarray) -> np.ndarray:
    w = 1 << np.arange(bits.shape[-1], dtype=np.int64)
    return bits.astype(np.int64) @ w


def _perm(keys: np.ndarray, shifted: np.ndarray) -> np.ndarray:
    order = np.argsort(keys)
    return order[np.searchsorted(keys[order], shifted)]


# ---------------------------------------------------------------------------
# constructors

def global_depolarizing(n: int, lam: float, sspam_mode: str = "perfect") -> ErrorModel:
    return ErrorModel("global_depolarizing", n, {"lam": float(lam)}, sspam_mode)


def local_depolarizing(n: int, rate: float, sspam_mode: str = "perfect") -> ErrorModel:
    return ErrorModel("local_depolarizing", n, {"rate": float(rate)}, sspam_mode)


def weighted_local(profile: WeightProfile, sspam_mode: str = "perfect") -> ErrorModel:
    return ErrorModel("weighted_local", profile.n, {"rates": [float(r) for r in profile.rates]}, sspam_mode)


def _random_rates(total: float, k: int, rng: np.random.Generator) -> np.ndarray:
    split = rng.dirichlet(np.ones(4 ** k - 1))
    return np.concatenate([[1.0 - total], total * split])


def sample_stochastic_pauli_model(n: int, edges: Sequence[tuple], q: float, rng: np.random.Generator,
                                  oneq_names: Sequence[str] = ("X90", "Y90", "I"),
                                  sspam_mode: str = "perfect") -> ErrorModel:
    """Random gate-dependent Pauli model with expected two-qubit infidelity ``q``.

    Each two-qubit gate (both CNOT orientations on every edge) draws a total
    error probability uniformly from ``[0, 2q]``; each one-qubit gate draws
    from ``[0, 0.2q]``, so its expected infidelity is ``0.1q``.  The error is
    split over the non-identity Paulis with a flat Dirichlet draw.  Wildcard
    entries with the same statistics cover any other gate name, such as the
    gates used in compiled preparation and measurement circuits.
    """
    table = {}
    for a, b in edges:
        for pair in ((a, b), (b, a)):
            table[("CNOT", pair)] = _random_rates(rng.uniform(0, 2 * q), 2, rng)
            table[("*", pair)] = _random_rates(rng.uniform(0, 2 * q), 2, rng)
    for qb in range(n):
        for name in oneq_names:
            table[(name, (qb,))] = _random_rates(rng.uniform(0, 0.2 * q), 1, rng)
        table[("*", (qb,))] = _random_rates(rng.uniform(0, 0.2 * q), 1, rng)
    return ErrorModel("stochastic_pauli", n, {"table": table}, sspam_mode)


# ---------------------------------------------------------------------------
# single-qubit Markovian generators

GENERATOR_LABELS = ("H_X", "H_Y", "H_Z", "S_X", "S_Y", "S_Z",
                    "C_XY", "C_XZ", "C_YZ", "A_XY", "A_XZ", "A_YZ")
_P1 = {"I": np.eye(2, dtype=complex), "X": np.array([[0, 1], [1, 0]], dtype=complex),
       "Y": np.array([[0, -1j], [1j, 0]], dtype=complex), "Z": np.diag([1, -1]).astype(complex)}


def _superop_ptm(fn) -> np.ndarray:
    b = pauli_basis(1)
    return np.real(np.array([[np.trace(b[j] @ fn(b[k])) for k in range(4)] for j in range(4)]))


@lru_cache(maxsize=None)
def elementary_generator(label: str) -> np.ndarray:
    """PTM of an elementary error generator.

    ``H_P[rho] = -i[P, rho]``, ``S_P[rho] = P rho P - rho``,
    ``C_PQ[rho] = P rho Q + Q rho P - {{P, Q}, rho}/2`` and
    ``A_PQ[rho] = i(P rho Q - Q rho P + {[P, Q], rho}/2)``.
    """
    kind, paulis = label.split("_")
    P = _P1[paulis[0]]
    if kind == "H":
        fn = lambda r: -1j * (P @ r - r @ P)
    elif kind == "S":
        fn = lambda r: P @ r @ P - r
    else:
        Q = _P1[paulis[1]]
        if kind == "C":
            ac = P @ Q + Q @ P
            fn = lambda r: P @ r @ Q + Q @ r @ P - 0.5 * (ac @ r + r @ ac)
        elif kind == "A":
            cm = P @ Q - Q @ P
            fn = lambda r: 1j * (P @ r @ Q - Q @ r @ P + 0.5 * (cm @ r + r @ cm))
        else:
            raise ValueError(f"unknown generator {label}")
    m = _superop_ptm(fn)
    m.setflags(write=False)
    return m


def generator_error_map(rates: Sequence[float]) -> np.ndarray:
    """``exp(sum_i v_i V_i)`` as a single-qubit PTM."""
    gen = sum(v * elementary_generator(lbl) for v, lbl in zip(rates, GENERATOR_LABELS))
    return np.real(expm(gen))


def draw_generator_rates(epsilon: float, rng: np.random.Generator) -> np.ndarray:
    """H rates uniform on [0, sqrt(eps)], S/C/A rates uniform on [0, eps]."""
    h = rng.uniform(0, np.sqrt(epsilon), 3)
    rest = rng.uniform(0, epsilon, 9)
    return np.concatenate([h, rest])


def sample_markovian_model(epsilon: float, rng: np.random.Generator, gates: Sequence[str] = ("X90", "Y90"),
                           max_draws: int = 100000) -> ErrorModel:
    """Independent random generator model per gate, redrawn until the map is CP."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    errors, rates = {}, {}
    for name in gates:
        for _ in range(max_draws):
            v = draw_generator_rates(epsilon, rng)
            e = generator_error_map(v)
            if is_completely_positive(Ptm(1, e), tol=1e-10):
                break
        else:
            raise RuntimeError("could not draw a completely positive model")
        errors[name] = e
        rates[name] = v
    return ErrorModel("markovian_generators", 1, {"errors": errors, "rates": rates})


def markovian_from_ptms(errors: dict, n: int = 1) -> ErrorModel:
    return ErrorModel("markovian_generators", n, {"errors": {k: np.asarray(v) for k, v in errors.items()}})


def epsilon_omega(model: ErrorModel, omega, conn=None, rng: np.random.Generator | None = None,
                  samples: int = 20000) -> float:
    """Omega-weighted mean entanglement infidelity of the layer error maps.

    Layer-independent models are evaluated exactly.  Otherwise the average is
    exact when Omega can be enumerated and estimated from ``samples`` draws if
    it cannot.
    """
    if model.kind == "global_depolarizing":
        d2 = 4 ** model.n
        return (d2 - 1) * (1 - model.params["lam"]) / d2
    if model.kind == "local_depolarizing":
        return 1.0 - (1.0 - model.params["rate"]) ** model.n
    if model.kind == "weighted_local":
        return float(1.0 - np.prod(1.0 - np.asarray(model.params["rates"])))
    try:
        pairs = omega.enumerate(model.n)
    except ValueError:
        pairs = None
    if pairs is not None:
        return float(sum(w * model.layer_infidelity(layer) for layer, w in pairs))
    if rng is None or conn is None:
        raise ValueError("sampling estimate needs conn and rng")
    return float(np.mean([model.layer_infidelity(omega.sample(conn, rng)) for _ in range(samples)]))
