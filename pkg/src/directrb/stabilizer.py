"""Stabilizer states and the Gaussian-elimination Clifford compilers.

Two compilers are provided.  :func:`compile_state_prep` only reproduces a
Clifford's action on ``|0...0>`` (conditional compilation) and
:func:`compile_unitary` reproduces the whole group element (unconditional
compilation).  Both reduce a tableau to the trivial one by applying gates,
choosing the lowest available qubit index as pivot, and then return the
reversed sequence of inverse gates.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import Circuit, Gate, schedule
from .clifford import Clifford, apply_gate_rows
from .connectivity import Connectivity
from .pauli import Pauli, phase_exponent

_INVERSE_NAME = {"S": "SDG", "SDG": "S"}


def _rowmult(x, z, r, h: int, i: int) -> None:
    """Row h <- row i * row h for commuting Hermitian rows (signs as bits)."""
    g = int(phase_exponent(x[i], z[i], x[h], z[h]).sum())
    total = (2 * int(r[i]) + 2 * int(r[h]) + g) % 4
    if total % 2:
        raise ValueError("rows do not commute")
    r[h] = total // 2
    x[h] ^= x[i]
    z[h] ^= z[i]


class StabilizerState:
    """Pure stabilizer state given by n independent commuting generators."""

    def __init__(self, x, z, r):
        self.x = np.array(x, dtype=np.uint8)
        self.z = np.array(z, dtype=np.uint8)
        self.r = np.array(r, dtype=np.uint8).ravel()
        self.n = self.x.shape[1]
        if self.x.shape != (self.n, self.n) or self.z.shape != self.x.shape or self.r.size != self.n:
            raise ValueError("a stabilizer tableau needs n generators on n qubits")

    @classmethod
    def zero(cls, n: int) -> "StabilizerState":
        return cls(np.zeros((n, n)), np.eye(n), np.zeros(n))

    @classmethod
    def from_clifford(cls, c: Clifford) -> "StabilizerState":
        """The state ``U(c)|0...0>``: generators are the images of the Z_j."""
        n = c.n
        t = c.s.T
        return cls(t[n:, :n], t[n:, n:], c.r[n:])

    @classmethod
    def from_strings(cls, generators: Sequence[str]) -> "StabilizerState":
        ps = [Pauli.from_string(g) for g in generators]
        if any(not p.is_hermitian() for p in ps):
            raise ValueError("generators must be Hermitian")
        return cls([p.x for p in ps], [p.z for p in ps], [p.phase // 2 for p in ps])

    def copy(self) -> "StabilizerState":
        return StabilizerState(self.x.copy(), self.z.copy(), self.r.copy())

    def generators(self) -> list[Pauli]:
        return [Pauli(self.x[i], self.z[i], 2 * int(self.r[i])) for i in range(self.n)]

    def canonical(self):
        """Reduced row-echelon generators; equal states have equal forms."""
        x, z, r = self.x.copy(), self.z.copy(), self.r.copy()
        n = self.n
        row = 0
        for col in range(2 * n):
            bits = x if col < n else z
            q = col % n
            piv = next((i for i in range(row, n) if bits[i, q]), None)
            if piv is None:
                continue
            if piv != row:
                x[[row, piv]] = x[[piv, row]]
                z[[row, piv]] = z[[piv, row]]
                r[[row, piv]] = r[[piv, row]]
            for i in range(n):
                if i != row and bits[i, q]:
                    _rowmult(x, z, r, i, row)
            row += 1
        return x, z, r

    def __eq__(self, other) -> bool:
        if not isinstance(other, StabilizerState) or other.n != self.n:
            return NotImplemented
        return all(np.array_equal(a, b) for a, b in zip(self.canonical(), other.canonical()))

    def __repr__(self) -> str:
        return "StabilizerState(" + ", ".join(str(g) for g in self.generators()) + ")"


def apply(state: StabilizerState, layer) -> StabilizerState:
    out = state.copy()
    for g in layer:
        apply_gate_rows(out.x, out.z, out.r, g)
    return out


def apply_circuit(state: StabilizerState, circuit: Circuit) -> StabilizerState:
    out = state.copy()
    for layer in circuit.layers:
        for g in layer:
            apply_gate_rows(out.x, out.z, out.r, g)
    return out


def outcome_probability(state: StabilizerState, bitstring: str) -> float:
    """Exact ``|<bits|psi>|^2``; qubit 0 is the leftmost character."""
    n = state.n
    if len(bitstring) != n:
        raise ValueError("bitstring length must equal n")
    s = np.array([int(b) for b in bitstring], dtype=np.int64)
    x, z, r = state.x.copy(), state.z.copy(), state.r.copy()
    rank = 0
    for q in range(n):
        piv = next((i for i in range(rank, n) if x[i, q]), None)
        if piv is None:
            continue
        if piv != rank:
            x[[rank, piv]] = x[[piv, rank]]
            z[[rank, piv]] = z[[piv, rank]]
            r[[rank, piv]] = r[[piv, rank]]
        for i in range(n):
            if i != rank and x[i, q]:
                _rowmult(x, z, r, i, rank)
        rank += 1
    # Remaining generators are diagonal: +-Z^z, with eigenvalue (-1)^(r + z.s) on |s>.
    for i in range(rank, n):
        if (int(r[i]) + int(z[i].astype(np.int64) @ s)) % 2:
            return 0.0
    return 2.0 ** (-rank)


def is_eigenstate(state: StabilizerState, p: Pauli) -> bool:
    """True iff ``p`` (or ``-p``) stabilizes the state, i.e. ``|<psi|p|psi>|^2 = 1``."""
    vx = p.x.astype(np.int64)
    vz = p.z.astype(np.int64)
    anti = (state.x.astype(np.int64) @ vz + state.z.astype(np.int64) @ vx) % 2
    return not anti.any()


# ---------------------------------------------------------------------------
# compilation

@dataclass
class CompiledCircuit:
    circuit: Circuit
    twoq_count: int
    oneq_count: int

    @classmethod
    def from_gates(cls, n: int, gates: Sequence[Gate], conn: Connectivity | None = None) -> "CompiledCircuit":
        gates = route(gates, conn) if conn is not None else list(gates)
        circ = schedule(n, gates)
        return cls(circ, circ.twoq_count(), circ.oneq_count())


def inverse_gate(g: Gate) -> Gate:
    if g.name in _INVERSE_NAME:
        return Gate(_INVERSE_NAME[g.name], g.qubits)
    if g.name in ("H", "X", "Y", "Z", "I", "CNOT", "CPHASE", "SWAP") and not g.params:
        return g
    raise ValueError(f"no inverse rule for {g}")


def _invert_sequence(gates: Sequence[Gate]) -> list[Gate]:
    return [inverse_gate(g) for g in reversed(gates)]


def route(gates: Sequence[Gate], conn: Connectivity) -> list[Gate]:
    """Realize two-qubit gates on non-adjacent qubits with SWAP chains.

    Each SWAP is expanded into three CNOTs; the chain is undone after the gate
    so the logical qubit layout is unchanged.
    """
    out: list[Gate] = []
    for g in gates:
        if not g.is_two_qubit or conn.adjacent(*g.qubits):
            out.append(g)
            continue
        a, b = g.qubits
        path = conn.shortest_path(a, b)
        swaps = []
        for u, v in zip(path[:-2], path[1:-1]):
            swaps.extend([Gate("CNOT", (u, v)), Gate("CNOT", (v, u)), Gate("CNOT", (u, v))])
        out.extend(swaps)
        out.append(Gate(g.name, (path[-2], b), g.params))
        out.extend(reversed(swaps))
    return out


def _check_connected(n: int, conn: Connectivity | None) -> None:
    if conn is None or n <= 1:
        return
    import networkx as nx
    if not nx.is_connected(conn.graph):
        raise ValueError("connectivity graph is disconnected")


def _reduce_state(state: StabilizerState) -> list[Gate]:
    """Gates that map ``state`` to ``|0...0>`` exactly (signs included)."""
    n = state.n
    x, z, r = state.x.copy(), state.z.copy(), state.r.copy()
    gates: list[Gate] = []

    def do(g: Gate):
        apply_gate_rows(x, z, r, g)
        gates.append(g)

    for j in range(n):
        piv = next((i for i in range(j, n) if x[i, j]), None)
        if piv is None:
            piv = next((i for i in range(j, n) if z[i, j]), None)
            if piv is None:
                raise ValueError("generators are not independent")
            do(Gate("H", (j,)))
        if piv != j:
            x[[j, piv]] = x[[piv, j]]
            z[[j, piv]] = z[[piv, j]]
            r[[j, piv]] = r[[piv, j]]
        for i in range(j + 1, n):
            if x[i, j]:
                _rowmult(x, z, r, i, j)
        for k in range(j + 1, n):
            if x[j, k]:
                do(Gate("CNOT", (j, k)))
        if z[j, j]:
            do(Gate("S", (j,)))
        for k in range(j + 1, n):
            if z[j, k]:
                do(Gate("CPHASE", (j, k)))
        do(Gate("H", (j,)))
    # every generator is now diagonal; back-substitute to single Z's
    for i in range(n):
        for m in range(n):
            if m != i and z[i, m]:
                _rowmult(x, z, r, i, m)
    assert not x.any() and np.array_equal(z, np.eye(n, dtype=np.uint8))
    for j in range(n):
        if r[j]:
            do(Gate("X", (j,)))
    return gates


def compile_state_prep(target: StabilizerState, connectivity: Connectivity | None = None) -> CompiledCircuit:
    """Circuit taking ``|0...0>`` to ``target``."""
    _check_connected(target.n, connectivity)
    return CompiledCircuit.from_gates(target.n, _invert_sequence(_simplify(_reduce_state(target))), connectivity)


def compile_measurement_prep(current: StabilizerState, target_bits: str,
                             connectivity: Connectivity | None = None) -> CompiledCircuit:
    """Circuit taking ``current`` to the basis state ``|target_bits>``."""
    n = current.n
    if len(target_bits) != n:
        raise ValueError("target_bits length must equal n")
    _check_connected(n, connectivity)
    gates = _reduce_state(current)
    flips = np.zeros(n, dtype=np.uint8)
    body = []
    for g in gates:
        # trailing sign-fixing X gates are merged with the target bit flips
        if g.name == "X":
            flips[g.qubits[0]] ^= 1
        else:
            body.append(g)
    for j, b in enumerate(target_bits):
        flips[j] ^= int(b)
    body = _simplify(body)
    body.extend(Gate("X", (j,)) for j in range(n) if flips[j])
    return CompiledCircuit.from_gates(n, body, connectivity)


def _reduce_clifford(c: Clifford) -> list[Gate]:
    """Gates g_1..g_m with g_m o ... o g_1 o c equal to the identity."""
    n = c.n
    x, z, r = c.rows()
    gates: list[Gate] = []

    def do(g: Gate):
        apply_gate_rows(x, z, r, g)
        gates.append(g)

    for j in range(n):
        d, s = j, n + j
        k = next((q for q in range(j, n) if x[d, q]), None)
        if k is None:
            k = next((q for q in range(j, n) if z[d, q]), None)
            if k is None:
                raise ValueError("tableau is not symplectic")
            do(Gate("H", (k,)))
        if not x[d, j]:
            do(Gate("CNOT", (k, j)))
        for q in range(j + 1, n):
            if x[d, q]:
                do(Gate("CNOT", (j, q)))
        if z[d, j]:
            do(Gate("S", (j,)))
        for q in range(j + 1, n):
            if z[d, q]:
                do(Gate("CPHASE", (j, q)))
        do(Gate("H", (j,)))
        for q in range(j + 1, n):
            if x[s, q]:
                do(Gate("CNOT", (j, q)))
        if z[s, j]:
            do(Gate("S", (j,)))
        for q in range(j + 1, n):
            if z[s, q]:
                do(Gate("CPHASE", (j, q)))
        do(Gate("H", (j,)))
    assert np.array_equal(np.hstack([x, z]), np.eye(2 * n, dtype=np.uint8))
    for j in range(n):
        if r[j]:
            do(Gate("Z", (j,)))
        if r[n + j]:
            do(Gate("X", (j,)))
    return gates


def compile_unitary(c: Clifford, connectivity: Connectivity | None = None) -> CompiledCircuit:
    """Circuit whose net Clifford equals ``c`` (global phase ignored)."""
    _check_connected(c.n, connectivity)
    return CompiledCircuit.from_gates(c.n, _invert_sequence(_simplify(_reduce_clifford(c))), connectivity)


def _simplify(gates: list[Gate]) -> list[Gate]:
    """Cancel adjacent identical self-inverse gates (e.g. H H) on the same qubits."""
    out: list[Gate] = []
    last_on: dict[int, int] = {}
    for g in gates:
        prev_idx = {last_on.get(q) for q in g.qubits}
        if len(prev_idx) == 1:
            idx = prev_idx.pop()
            if idx is not None and out[idx] is not None:
                p = out[idx]
                if p == g and g.name in ("H", "X", "Y", "Z", "CNOT", "CPHASE", "SWAP"):
                    out[idx] = None
                    for q in g.qubits:
                        last_on.pop(q, None)
                    continue
        out.append(g)
        for q in g.qubits:
            last_on[q] = len(out) - 1
    return [g for g in out if g is not None]
