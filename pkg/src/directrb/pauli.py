"""n-qubit Pauli operators in symplectic form.

A Pauli is stored as ``i**phase * P_0 (x) P_1 (x) ... (x) P_{n-1}`` where each
single-qubit factor is read off its ``(x_j, z_j)`` bit pair:
``(0,0)=I, (1,0)=X, (1,1)=Y, (0,1)=Z``.  With this convention Hermitian Paulis
have phase 0 or 2, which matches the Aaronson-Gottesman tableau rows used in
:mod:`directrb.clifford`.

The flat symplectic vector of a Pauli is the x-block followed by the z-block,
with qubit 0 in position 0 of each block.  The text form puts qubit 0 leftmost.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping

import numpy as np

LETTERS = "IXYZ"
_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_PHASE_TAGS = {"+": 0, "+i": 1, "-": 2, "-i": 3}
_TAG_OF_PHASE = {0: "+", 1: "+i", 2: "-", 3: "-i"}


def _as_bits(v, n: int | None = None) -> np.ndarray:
    a = np.asarray(v, dtype=np.uint8).ravel() & 1
    if n is not None and a.size != n:
        raise ValueError(f"expected {n} bits, got {a.size}")
    a.setflags(write=False)
    return a


def phase_exponent(x1, z1, x2, z2) -> np.ndarray:
    """Per-qubit power of i picked up when multiplying P1 by P2 (P1 on the left).

    Works elementwise on integer arrays.  This is the ``g`` function of the
    Aaronson-Gottesman rowsum routine, returned mod 4 as values in {0, 1, 3}.
    """
    x1 = np.asarray(x1, dtype=np.int64)
    z1 = np.asarray(z1, dtype=np.int64)
    x2 = np.asarray(x2, dtype=np.int64)
    z2 = np.asarray(z2, dtype=np.int64)
    g = np.where(
        (x1 == 1) & (z1 == 1),
        z2 - x2,
        np.where(x1 == 1, z2 * (2 * x2 - 1), np.where(z1 == 1, x2 * (1 - 2 * z2), 0)),
    )
    return np.mod(g, 4)


@dataclass(frozen=True, eq=False)
class Pauli:
    """An n-qubit Pauli operator with a phase that is a power of i."""

    x: np.ndarray
    z: np.ndarray
    phase: int = 0
    n: int = field(init=False)

    def __post_init__(self):
        x = _as_bits(self.x)
        z = _as_bits(self.z)
        if x.size != z.size:
            raise ValueError("x and z must have the same length")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "phase", int(self.phase) % 4)
        object.__setattr__(self, "n", int(x.size))

    # -- constructors -------------------------------------------------
    @classmethod
    def identity(cls, n: int) -> "Pauli":
        return cls(np.zeros(n, np.uint8), np.zeros(n, np.uint8), 0)

    @classmethod
    def from_string(cls, text: str) -> "Pauli":
        """Parse e.g. ``"XIZ"``, ``"-YY"`` or ``"+iXZ"``."""
        s = text.strip()
        phase = 0
        for tag in ("+i", "-i", "+", "-"):
            if s.startswith(tag):
                phase = _PHASE_TAGS[tag]
                s = s[len(tag):]
                break
        if not s or any(c not in _LETTER_BITS for c in s):
            raise ValueError(f"not a Pauli string: {text!r}")
        x = [_LETTER_BITS[c][0] for c in s]
        z = [_LETTER_BITS[c][1] for c in s]
        return cls(x, z, phase)

    @classmethod
    def from_vector(cls, v, phase: int = 0) -> "Pauli":
        v = np.asarray(v, dtype=np.uint8)
        n = v.size // 2
        return cls(v[:n], v[n:], phase)

    @classmethod
    def from_index(cls, index: int, n: int) -> "Pauli":
        """Inverse of :meth:`index`: lexicographic over IXYZ, qubit 0 most significant."""
        letters = []
        for _ in range(n):
            letters.append(LETTERS[index % 4])
            index //= 4
        return cls.from_string("".join(reversed(letters)))

    # -- views ----------------------------------------------------------
    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.z])

    def letters(self) -> str:
        return "".join("IZXY"[2 * int(xi) + int(zi)] for xi, zi in zip(self.x, self.z))

    def index(self) -> int:
        """Position in the lexicographic IXYZ ordering (the PTM basis order)."""
        k = 0
        for c in self.letters():
            k = 4 * k + LETTERS.index(c)
        return k

    def stripped(self) -> "Pauli":
        """Same operator with the phase dropped."""
        return Pauli(self.x, self.z, 0)

    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    def weight(self) -> int:
        return weight(self)

    def to_matrix(self) -> np.ndarray:
        mats = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]),
                "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1, -1])}
        out = np.array([[1.0 + 0j]])
        for c in self.letters():
            out = np.kron(out, mats[c])
        return (1j ** self.phase) * out

    def __str__(self) -> str:
        return _TAG_OF_PHASE[self.phase] + self.letters()

    def __repr__(self) -> str:
        return f"Pauli('{self}')"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Pauli):
            return NotImplemented
        return (self.n == other.n and self.phase == other.phase
                and np.array_equal(self.x, other.x) and np.array_equal(self.z, other.z))

    def __hash__(self) -> int:
        return hash((self.n, self.phase, self.x.tobytes(), self.z.tobytes()))

    def __mul__(self, other: "Pauli") -> "Pauli":
        return multiply(self, other)


def multiply(a: Pauli, b: Pauli) -> Pauli:
    """Group product ``a * b`` with exact phase."""
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")
    g = int(phase_exponent(a.x, a.z, b.x, b.z).sum())
    return Pauli(a.x ^ b.x, a.z ^ b.z, a.phase + b.phase + g)


def weight(p: Pauli) -> int:
    return int(np.count_nonzero(p.x | p.z))


def symplectic_product(a: Pauli, b: Pauli) -> int:
    """0 if a and b commute, 1 if they anticommute."""
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")
    return int((np.dot(a.x, b.z) + np.dot(a.z, b.x)) % 2)


def commutes(a: Pauli, b: Pauli) -> bool:
    return symplectic_product(a, b) == 0


def all_paulis(n: int) -> list[Pauli]:
    """All 4**n phase-free Paulis in PTM basis order."""
    return [Pauli.from_index(k, n) for k in range(4 ** n)]


def index_bits(indices, k: int) -> np.ndarray:
    """Map lexicographic Pauli indices on k qubits to symplectic bits.

    Returns an array of shape ``indices.shape + (2k,)`` holding the x-block
    then the z-block.
    """
    idx = np.asarray(indices, dtype=np.int64)
    out = np.zeros(idx.shape + (2 * k,), dtype=np.uint8)
    letter_x = np.array([0, 1, 1, 0], dtype=np.uint8)
    letter_z = np.array([0, 0, 1, 1], dtype=np.uint8)
    for q in range(k):
        digit = (idx // 4 ** (k - 1 - q)) % 4
        out[..., q] = letter_x[digit]
        out[..., k + q] = letter_z[digit]
    return out


class PauliDistribution:
    """Probability distribution over phase-free Paulis.

    Keys may be given as :class:`Pauli` objects or text; phases are dropped.
    """

    def __init__(self, support: Mapping[Pauli | str, float]):
        table: Dict[Pauli, float] = {}
        for key, prob in support.items():
            p = Pauli.from_string(key) if isinstance(key, str) else key
            p = p.stripped()
            table[p] = table.get(p, 0.0) + float(prob)
        if not table:
            raise ValueError("empty support")
        sizes = {p.n for p in table}
        if len(sizes) != 1:
            raise ValueError("all Paulis in a distribution must act on the same qubits")
        probs = np.array(list(table.values()))
        if np.any(probs < 0):
            raise ValueError("negative probability")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
        self.n = sizes.pop()
        self.support = table
        self._paulis = list(table)
        self._probs = probs

    @classmethod
    def from_vector(cls, probs: Iterable[float], n: int) -> "PauliDistribution":
        """Build from a dense length-4**n vector in PTM basis order."""
        probs = list(probs)
        if len(probs) != 4 ** n:
            raise ValueError("need 4**n probabilities")
        return cls({Pauli.from_index(k, n): pr for k, pr in enumerate(probs) if pr > 0})

    def dense(self) -> np.ndarray:
        """Dense probability vector in PTM basis order."""
        out = np.zeros(4 ** self.n)
        for p, pr in self.support.items():
            out[p.index()] += pr
        return out

    def error_probability(self) -> float:
        """Total weight on non-identity Paulis, which is the entanglement infidelity."""
        return 1.0 - self.support.get(Pauli.identity(self.n), 0.0)

    def __repr__(self) -> str:
        body = ", ".join(f"{p.letters()}: {pr:.6g}" for p, pr in self.support.items())
        return f"PauliDistribution({{{body}}})"


def sample(dist: PauliDistribution, rng: np.random.Generator) -> Pauli:
    k = rng.choice(len(dist._paulis), p=dist._probs)
    return dist._paulis[int(k)]


def depolarizing_distribution(n: int, rate: float) -> PauliDistribution:
    """Uniform depolarization: with probability ``rate`` a uniformly random Pauli."""
    d2 = 4 ** n
    probs = np.full(d2, rate / d2)
    probs[0] += 1.0 - rate
    return PauliDistribution.from_vector(probs, n)
