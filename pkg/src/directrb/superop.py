"""Pauli-transfer-matrix (PTM) channels and fidelity functionals.

Basis: normalized Paulis ``B_k = P_k / sqrt(d)`` in lexicographic IXYZ order
with qubit 0 the most significant letter, so ``B_0`` is the scaled identity.
Density matrices map to real column vectors ``rho_k = Tr(B_k rho)`` and a
channel is the real matrix ``R_jk = Tr(B_j E(B_k))``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .circuit import Gate, Circuit, layer_unitary
from .clifford import Clifford, conjugate
from .pauli import PauliDistribution, all_paulis

MAX_PTM_QUBITS = 6


@lru_cache(maxsize=None)
def pauli_basis(n: int) -> np.ndarray:
    """Array of shape (4**n, 2**n, 2**n) holding the normalized basis."""
    if n > MAX_PTM_QUBITS:
        raise ValueError(f"dense PTM work is capped at {MAX_PTM_QUBITS} qubits")
    d = 2 ** n
    mats = np.array([p.to_matrix() for p in all_paulis(n)]) / np.sqrt(d)
    mats.setflags(write=False)
    return mats


@dataclass(frozen=True, eq=False)
class Ptm:
    n: int
    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        if m.shape != (4 ** self.n, 4 ** self.n):
            raise ValueError(f"PTM for {self.n} qubits must be {4 ** self.n}x{4 ** self.n}")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @property
    def is_tp(self) -> bool:
        e0 = np.zeros(4 ** self.n)
        e0[0] = 1
        return bool(np.allclose(self.m[0], e0, atol=1e-12))

    def __matmul__(self, other: "Ptm") -> "Ptm":
        """Composition: ``self @ other`` applies ``other`` first."""
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        return Ptm(self.n, self.m @ other.m)

    def inverse(self) -> "Ptm":
        return Ptm(self.n, np.linalg.inv(self.m))

    @classmethod
    def identity(cls, n: int) -> "Ptm":
        return cls(n, np.eye(4 ** n))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            for row in self.m:
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path) -> "Ptm":
        rows = [[float(v) for v in row] for row in csv.reader(Path(path).open())]
        m = np.array(rows)
        n = int(round(np.log(m.shape[0]) / np.log(4)))
        return cls(n, m)


def ptm_from_unitary(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    n = int(round(np.log2(u.shape[0])))
    b = pauli_basis(n)
    conj = np.einsum("ab,kbc,dc->kad", u, b, u.conj())
    return np.real(np.einsum("jab,kba->jk", b, conj))


def ptm_of_clifford(c: Clifford) -> np.ndarray:
    """Signed permutation matrix of a Clifford, computed from its tableau."""
    n = c.n
    m = np.zeros((4 ** n, 4 ** n))
    for k, p in enumerate(all_paulis(n)):
        img = conjugate(c, p)
        m[img.index(), k] = 1.0 if img.phase == 0 else -1.0
    return m


def ptm_of_unitary(obj, n: int | None = None) -> Ptm:
    """PTM of a Clifford, a vocabulary gate, a layer, a circuit or a dense unitary.

    Gates and layers need ``n`` to fix the register size.
    """
    if isinstance(obj, Clifford):
        return Ptm(obj.n, ptm_of_clifford(obj))
    if isinstance(obj, Gate):
        if n is None:
            n = len(obj.qubits)
        return Ptm(n, ptm_from_unitary(layer_unitary((obj,), n)))
    if isinstance(obj, Circuit):
        m = np.eye(4 ** obj.n)
        for layer in obj.layers:
            m = ptm_from_unitary(layer_unitary(layer, obj.n)) @ m
        return Ptm(obj.n, m)
    if isinstance(obj, tuple):
        if n is None:
            raise ValueError("a layer needs the register size n")
        return Ptm(n, ptm_from_unitary(layer_unitary(obj, n)))
    u = np.asarray(obj)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"cannot build a PTM from {type(obj).__name__}")
    return Ptm(int(round(np.log2(u.shape[0]))), ptm_from_unitary(u))


def entanglement_infidelity(e: Ptm, target: Ptm | None = None) -> float:
    """``1 - Tr(e target^-1) / 4**n``."""
    m = e.m if target is None else _relative(e, target)
    return float(1.0 - np.trace(m) / m.shape[0])


def average_gate_infidelity(e: Ptm, target: Ptm | None = None) -> float:
    d = 2 ** e.n
    return entanglement_infidelity(e, target) * d / (d + 1)


def _relative(e: Ptm, target: Ptm) -> np.ndarray:
    if e.n != target.n:
        raise ValueError("dimension mismatch")
    if abs(np.linalg.det(target.m)) < 1e-300 or np.linalg.cond(target.m) > 1e14:
        raise np.linalg.LinAlgError("target PTM is singular")
    return e.m @ np.linalg.inv(target.m)


def depolarizing(n: int, lam: float) -> Ptm:
    d2 = 4 ** n
    if not (-1.0 / (d2 - 1) - 1e-15 <= lam <= 1.0 + 1e-15):
        raise ValueError(f"lambda={lam} outside the completely positive range")
    return Ptm(n, np.diag([1.0] + [lam] * (d2 - 1)))


def depolarizing_parameter(e: Ptm) -> float:
    """``(Tr e - 1) / (d**2 - 1)``, the twirled depolarizing strength."""
    d2 = 4 ** e.n
    return float((np.trace(e.m) - 1.0) / (d2 - 1))


def pauli_channel(dist: PauliDistribution) -> Ptm:
    """Diagonal PTM of a stochastic Pauli channel."""
    n = dist.n
    paulis = all_paulis(n)
    probs = dist.dense()
    vecs = np.array([p.to_vector() for p in paulis], dtype=np.int64)
    lam = symplectic_gram(vecs)
    diag = ((-1.0) ** lam) @ probs
    return Ptm(n, np.diag(diag))


def symplectic_gram(vecs: np.ndarray) -> np.ndarray:
    n = vecs.shape[1] // 2
    return (vecs[:, :n] @ vecs[:, n:].T + vecs[:, n:] @ vecs[:, :n].T) % 2


def pauli_twirl(e: Ptm) -> Ptm:
    """Pauli twirl of a channel: the diagonal of its PTM."""
    return Ptm(e.n, np.diag(np.diag(e.m)))


def tensor(*channels: Ptm) -> Ptm:
    """Tensor product; the first argument acts on the most significant qubits."""
    m = np.array([[1.0]])
    n = 0
    for c in channels:
        m = np.kron(m, c.m)
        n += c.n
    return Ptm(n, m)


def apply_to_operator(e: Ptm, op: np.ndarray) -> np.ndarray:
    b = pauli_basis(e.n)
    coeffs = np.einsum("kab,ba->k", b, op)
    out = e.m @ coeffs
    return np.einsum("k,kab->ab", out, b)


def choi(e: Ptm) -> np.ndarray:
    """Normalized (unit trace) Choi matrix ``sum |a><b| (x) E(|a><b|) / d``."""
    d = 2 ** e.n
    j = np.zeros((d * d, d * d), dtype=complex)
    for a in range(d):
        for b in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[a, b] = 1.0
            j[a * d:(a + 1) * d, b * d:(b + 1) * d] = apply_to_operator(e, unit)
    return j / d


def is_completely_positive(e: Ptm, tol: float = 1e-10) -> bool:
    j = choi(e)
    return bool(np.linalg.eigvalsh((j + j.conj().T) / 2).min() >= -tol)


def choi_trace_norm(e: Ptm) -> float:
    """Trace norm of the normalized Choi matrix of a (difference of) map(s).

    For a Hermiticity-preserving map this never exceeds the diamond norm and is
    at least ``1/d`` of it.
    """
    return float(np.abs(np.linalg.eigvalsh(choi(e))).sum())


@dataclass(frozen=True, eq=False)
class GaugeMap:
    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        if np.linalg.cond(m) > 1e12:
            m = m + 1e-12 * np.eye(m.shape[0])
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    def inverse_matrix(self) -> np.ndarray:
        try:
            return np.linalg.inv(self.m)
        except np.linalg.LinAlgError:
            return np.linalg.inv(self.m + 1e-12 * np.eye(self.m.shape[0]))


def gauge_transform(g: GaugeMap, e: Ptm) -> Ptm:
    if g.m.shape != e.m.shape:
        raise ValueError("dimension mismatch")
    return Ptm(e.n, g.m @ e.m @ g.inverse_matrix())


def state_vector(n: int, bits: str | None = None) -> np.ndarray:
    """PTM column vector of the computational basis state ``|bits>``."""
    bits = bits or "0" * n
    d = 2 ** n
    rho = np.zeros((d, d), dtype=complex)
    k = int(bits, 2)
    rho[k, k] = 1.0
    return np.real(np.einsum("kab,ba->k", pauli_basis(n), rho))
