"""Gates, layers and circuits, plus dense unitaries for the gate vocabulary.

A :class:`Layer` is an ordered tuple of gate applications.  Generated layers
normally act on disjoint qubits, but the order is meaningful when they do not
(the two-stage layers of the ``G4`` family apply their one-qubit part first).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

ONE_QUBIT_FIXED = ("I", "X", "Y", "Z", "H", "S", "SDG", "X90", "Y90")
ROTATIONS = ("X", "Y", "Z")  # with a single angle parameter
TWO_QUBIT = ("CNOT", "CPHASE", "SWAP")


@dataclass(frozen=True)
class Gate:
    """A named gate on explicit qubits.

    ``X``, ``Y`` and ``Z`` with one parameter ``theta`` are the rotations
    ``exp(-i theta P / 2)``; without a parameter they are the Pauli gates.
    ``C0`` ... ``C23`` name the elements of the single-qubit Clifford table.
    """

    name: str
    qubits: tuple
    params: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"repeated qubit in {self}")
        arity = gate_arity(self.name)
        if len(self.qubits) != arity:
            raise ValueError(f"{self.name} acts on {arity} qubit(s), got {self.qubits}")

    @property
    def is_two_qubit(self) -> bool:
        return len(self.qubits) == 2

    def to_json(self) -> dict:
        return {"name": self.name, "qubits": list(self.qubits), "params": list(self.params)}

    @classmethod
    def from_json(cls, obj: dict) -> "Gate":
        return cls(obj["name"], tuple(obj["qubits"]), tuple(obj.get("params", ())))


def gate_arity(name: str) -> int:
    if name in TWO_QUBIT:
        return 2
    if name in ONE_QUBIT_FIXED or _clifford_index(name) is not None:
        return 1
    raise ValueError(f"unknown gate {name!r}")


def _clifford_index(name: str):
    if name.startswith("C") and name[1:].isdigit():
        k = int(name[1:])
        if 0 <= k < 24:
            return k
    return None


Layer = tuple  # tuple[Gate, ...]


@dataclass
class Circuit:
    n: int
    layers: list = field(default_factory=list)

    def __post_init__(self):
        self.layers = [tuple(layer) for layer in self.layers]
        for layer in self.layers:
            for g in layer:
                if max(g.qubits) >= self.n:
                    raise ValueError(f"gate {g} outside {self.n} qubits")

    def __len__(self) -> int:
        return len(self.layers)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n != self.n:
            raise ValueError("qubit count mismatch")
        return Circuit(self.n, self.layers + other.layers)

    def gates(self) -> Iterable[Gate]:
        for layer in self.layers:
            yield from layer

    def twoq_count(self) -> int:
        return sum(1 for g in self.gates() if g.is_two_qubit)

    def oneq_count(self) -> int:
        return sum(1 for g in self.gates() if not g.is_two_qubit and g.name != "I")

    def to_json(self) -> list:
        return [[g.to_json() for g in layer] for layer in self.layers]

    @classmethod
    def from_json(cls, n: int, obj: list) -> "Circuit":
        return cls(n, [tuple(Gate.from_json(g) for g in layer) for layer in obj])

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))


def schedule(n: int, gates: Sequence[Gate]) -> Circuit:
    """Pack a gate sequence into parallel layers as early as possible."""
    frontier = [0] * n
    layers: list[list[Gate]] = []
    for g in gates:
        depth = max(frontier[q] for q in g.qubits)
        if depth == len(layers):
            layers.append([])
        layers[depth].append(g)
        for q in g.qubits:
            frontier[q] = depth + 1
    return Circuit(n, [tuple(layer) for layer in layers])


# ---------------------------------------------------------------------------
# dense unitaries

_SQ2 = 1 / math.sqrt(2)
_FIXED = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": _SQ2 * np.array([[1, 1], [1, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "SDG": np.array([[1, 0], [0, -1j]], dtype=complex),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CPHASE": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}


def rotation(axis: str, theta: float) -> np.ndarray:
    """``exp(-i theta P / 2)`` for P in {X, Y, Z}."""
    p = _FIXED[axis]
    return math.cos(theta / 2) * np.eye(2) - 1j * math.sin(theta / 2) * p


def gate_unitary(gate: Gate) -> np.ndarray:
    name = gate.name
    if name in ROTATIONS and gate.params:
        return rotation(name, gate.params[0])
    if name == "X90":
        return rotation("X", math.pi / 2)
    if name == "Y90":
        return rotation("Y", math.pi / 2)
    if name in _FIXED:
        return _FIXED[name]
    k = _clifford_index(name)
    if k is not None:
        from .clifford import single_qubit_table
        u = np.eye(2, dtype=complex)
        for w in single_qubit_table().words[k]:
            u = _FIXED[w] @ u
        return u
    raise ValueError(f"unknown gate {name!r}")


def embed(u: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """Lift a k-qubit operator on ``qubits`` to n qubits (qubit 0 most significant)."""
    k = len(qubits)
    others = [q for q in range(n) if q not in qubits]
    full = np.kron(u, np.eye(2 ** (n - k))).reshape((2,) * (2 * n))
    order = list(qubits) + others
    inv = np.argsort(order)
    full = full.transpose(list(inv) + [n + i for i in inv])
    return full.reshape(2 ** n, 2 ** n)


def layer_unitary(layer: Layer, n: int) -> np.ndarray:
    u = np.eye(2 ** n, dtype=complex)
    for g in layer:
        u = embed(gate_unitary(g), g.qubits, n) @ u
    return u


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    u = np.eye(2 ** circuit.n, dtype=complex)
    for layer in circuit.layers:
        u = layer_unitary(layer, circuit.n) @ u
    return u
