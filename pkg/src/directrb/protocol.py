"""Direct RB and Clifford-group RB circuit generation, suites and datasets.

A direct RB circuit is a stabilizer-state preparation subcircuit, ``d`` core
layers drawn from the sampling distribution, and a subcircuit that maps the
resulting state to the target bit string.  Every emitted circuit is checked
by stabilizer simulation to return its target with certainty.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .circuit import Circuit
from .clifford import Clifford, compose, inverse, net_clifford, uniform_random
from .connectivity import Connectivity
from .sampling import SamplingDistribution
from .stabilizer import (StabilizerState, apply_circuit, compile_measurement_prep, compile_state_prep,
                         compile_unitary, outcome_probability)

SUITE_SCHEMA = "directrb.suite/1"
DATASET_SCHEMA = "directrb.dataset/1"
DEFAULT_DEPTHS = (0, 1, 2, 4, 8, 16, 32, 64, 128)


class GenerationError(RuntimeError):
    pass


@dataclass
class ExperimentDesign:
    n: int
    depths: Sequence[int] = DEFAULT_DEPTHS
    K_d: int = 30
    N: int = 40
    # defaults to edge grab with xi_bar 0.25 (0 on a single qubit)
    omega: SamplingDistribution | None = None
    randomize_target: bool = True
    rng_seed: int = 0
    # "conditional": compile only the action on |0>; "unconditional": compile whole Cliffords
    sp_compilation: str = "conditional"

    def __post_init__(self):
        self.depths = tuple(int(d) for d in self.depths)
        if self.omega is None:
            self.omega = SamplingDistribution("edge_grab", {"xi_bar": 0.25 if self.n > 1 else 0.0})
        if self.n < 1:
            raise ValueError("n must be positive")
        if any(d < 0 for d in self.depths):
            raise ValueError("depths must be nonnegative")
        if self.K_d < 1 or self.N < 1:
            raise ValueError("K_d and N must be at least 1")
        if self.sp_compilation not in ("conditional", "unconditional"):
            raise ValueError("sp_compilation must be 'conditional' or 'unconditional'")

    def to_json(self) -> dict:
        out = asdict(self)
        out["omega"] = self.omega.to_json()
        out["depths"] = list(self.depths)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentDesign":
        obj = dict(obj)
        om = obj.pop("omega")
        return cls(omega=SamplingDistribution(om["kind"], om.get("params", {})), **obj)


@dataclass
class RbCircuit:
    id: str
    d: int
    target: str
    circuit: Circuit
    n_sp: int
    n_core: int
    n_mp: int

    @property
    def n(self) -> int:
        return self.circuit.n

    def parts(self) -> tuple[list, list, list]:
        layers = self.circuit.layers
        return (layers[: self.n_sp], layers[self.n_sp: self.n_sp + self.n_core],
                layers[self.n_sp + self.n_core:])

    def to_json(self) -> dict:
        return {"id": self.id, "d": self.d, "target": self.target, "n_sp": self.n_sp,
                "n_core": self.n_core, "n_mp": self.n_mp, "layers": self.circuit.to_json()}

    @classmethod
    def from_json(cls, n: int, obj: dict) -> "RbCircuit":
        return cls(obj["id"], int(obj["d"]), obj["target"], Circuit.from_json(n, obj["layers"]),
                   int(obj["n_sp"]), int(obj["n_core"]), int(obj["n_mp"]))


def circuit_rng(seed: int, depth_index: int, k: int) -> np.random.Generator:
    """Independent stream for circuit k at the given depth index."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(depth_index, k)))


def _random_target(n: int, rng: np.random.Generator, randomize: bool) -> str:
    if not randomize:
        return "0" * n
    return "".join(str(int(b)) for b in rng.integers(0, 2, n))


def _pauli_x(bits: str) -> Clifford:
    n = len(bits)
    r = np.zeros(2 * n, dtype=np.uint8)
    for j, b in enumerate(bits):
        r[n + j] = int(b)
    return Clifford(np.eye(2 * n, dtype=np.uint8), r)


def _verify(c: RbCircuit) -> None:
    final = apply_circuit(StabilizerState.zero(c.n), c.circuit)
    if outcome_probability(final, c.target) != 1.0:
        raise GenerationError(f"circuit {c.id} does not deterministically output {c.target}")


def generate_direct_rb(design: ExperimentDesign, conn: Connectivity | None = None,
                       verify: bool = True) -> list[RbCircuit]:
    n = design.n
    conn = conn or Connectivity.all_to_all(n)
    if conn.n != n:
        raise ValueError("connectivity size does not match the design")
    if not design.omega.is_clifford():
        raise GenerationError("direct RB generation needs a Clifford sampling distribution")
    out = []
    for di, d in enumerate(design.depths):
        for k in range(design.K_d):
            rng = circuit_rng(design.rng_seed, di, k)
            target = _random_target(n, rng, design.randomize_target)
            f_sp = uniform_random(n, rng)
            core = Circuit(n, design.omega.sample_layers(conn, d, rng))
            if design.sp_compilation == "conditional":
                psi = StabilizerState.from_clifford(f_sp)
                sp = compile_state_prep(psi, conn).circuit
                mp = compile_measurement_prep(apply_circuit(psi, core), target, conn).circuit
            else:
                sp = compile_unitary(f_sp, conn).circuit
                net = compose(net_clifford(core), f_sp)
                mp = compile_unitary(compose(_pauli_x(target), inverse(net)), conn).circuit
            rc = RbCircuit(f"d{d}_k{k}", d, target, sp + core + mp, len(sp), len(core), len(mp))
            if verify:
                _verify(rc)
            out.append(rc)
    return out


def generate_clifford_rb(design: ExperimentDesign, conn: Connectivity | None = None,
                         verify: bool = True) -> list[RbCircuit]:
    """Clifford-group RB: d+1 uniform Cliffords and a compiled inversion element.

    The first compiled Clifford is recorded as the preparation part, the next
    ``d`` as the core and the inversion element as the measurement part.
    """
    n = design.n
    conn = conn or Connectivity.all_to_all(n)
    out = []
    for di, d in enumerate(design.depths):
        for k in range(design.K_d):
            rng = circuit_rng(design.rng_seed, di, k)
            target = _random_target(n, rng, design.randomize_target)
            net = Clifford.identity(n)
            blocks = []
            for _ in range(d + 1):
                c = uniform_random(n, rng)
                blocks.append(compile_unitary(c, conn).circuit)
                net = compose(c, net)
            inv = compile_unitary(compose(_pauli_x(target), inverse(net)), conn).circuit
            core = Circuit(n, [layer for b in blocks[1:] for layer in b.layers])
            rc = RbCircuit(f"d{d}_k{k}", d, target, blocks[0] + core + inv,
                           len(blocks[0]), len(core), len(inv))
            if verify:
                _verify(rc)
            out.append(rc)
    return out


# ---------------------------------------------------------------------------
# persistence

def canonical_hash(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def write_suite(path, circuits: Sequence[RbCircuit], header: dict) -> None:
    head = {"schema": SUITE_SCHEMA, **header}
    with open(path, "w") as fh:
        fh.write(json.dumps(head, sort_keys=True) + "\n")
        for c in circuits:
            fh.write(json.dumps(c.to_json(), sort_keys=True, separators=(",", ":")) + "\n")


def read_suite(path) -> tuple[dict, list[RbCircuit]]:
    with open(path) as fh:
        header = json.loads(fh.readline())
        if header.get("schema") != SUITE_SCHEMA:
            raise ValueError(f"{path}: not a suite file (schema {header.get('schema')!r})")
        n = int(header["n"])
        circuits = [RbCircuit.from_json(n, json.loads(line)) for line in fh if line.strip()]
    return header, circuits


@dataclass
class RbDataset:
    """Per-circuit success counts for an RB experiment."""

    n: int
    records: list  # dicts with id, d, target, shots, successes
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for rec in self.records:
            if not (0 <= rec["successes"] <= rec["shots"]):
                raise ValueError(f"record {rec['id']}: successes outside [0, shots]")

    def depths(self) -> np.ndarray:
        return np.array(sorted({int(r["d"]) for r in self.records}))

    def by_depth(self) -> dict:
        """depth -> (successes array, shots array) in record order."""
        out: dict = {}
        for r in self.records:
            s, n = out.setdefault(int(r["d"]), ([], []))
            s.append(r["successes"])
            n.append(r["shots"])
        return {d: (np.array(s, dtype=float), np.array(n, dtype=float)) for d, (s, n) in sorted(out.items())}

    def mean_success(self) -> tuple[np.ndarray, np.ndarray]:
        """Depths and per-depth means of the per-circuit success frequencies."""
        groups = self.by_depth()
        d = np.array(list(groups))
        means = np.array([np.mean(s / n) for s, n in groups.values()])
        return d, means

    def rescaled(self, factor: int) -> "RbDataset":
        recs = [dict(r, shots=r["shots"] * factor, successes=r["successes"] * factor) for r in self.records]
        return RbDataset(self.n, recs, dict(self.metadata))

    def save(self, path, header: dict | None = None) -> None:
        head = {"schema": DATASET_SCHEMA, "n": self.n, **self.metadata, **(header or {})}
        with open(path, "w") as fh:
            fh.write(json.dumps(head, sort_keys=True) + "\n")
            for r in self.records:
                fh.write(json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n")

    @classmethod
    def load(cls, path) -> "RbDataset":
        with open(path) as fh:
            header = json.loads(fh.readline())
            if header.get("schema") != DATASET_SCHEMA:
                raise ValueError(f"{path}: not a dataset file (schema {header.get('schema')!r})")
            records = [json.loads(line) for line in fh if line.strip()]
        n = int(header.pop("n"))
        header.pop("schema")
        return cls(n, records, header)
