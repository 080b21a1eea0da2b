"""Clifford group elements as binary symplectic matrices with sign bits.

Column ``j`` of ``s`` (for ``j < n``) is the symplectic vector of the image of
``X_j``; column ``n + j`` is the image of ``Z_j``.  ``r[j]`` is the sign bit of
that image.  This is the Aaronson-Gottesman destabilizer/stabilizer tableau
written column-wise, with images stored as Hermitian Paulis in the
``(1,1) = Y`` convention of :mod:`directrb.pauli`.

``compose(a, b)`` is the element that applies ``b`` first and then ``a``.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Sequence

import numpy as np

from .circuit import Circuit, Gate, ROTATIONS, _clifford_index
from .pauli import Pauli, multiply


class NonCliffordGateError(ValueError):
    pass


def symplectic_form(n: int) -> np.ndarray:
    lam = np.zeros((2 * n, 2 * n), dtype=np.uint8)
    lam[:n, n:] = np.eye(n, dtype=np.uint8)
    lam[n:, :n] = np.eye(n, dtype=np.uint8)
    return lam


def is_symplectic(s: np.ndarray) -> bool:
    n = s.shape[0] // 2
    lam = symplectic_form(n).astype(np.int64)
    s = s.astype(np.int64)
    return bool(np.array_equal((s.T @ lam @ s) % 2, lam))


class Clifford:
    """An n-qubit Clifford, up to global phase."""

    __slots__ = ("n", "s", "r")

    def __init__(self, s, r):
        s = np.asarray(s, dtype=np.uint8) & 1
        r = np.asarray(r, dtype=np.uint8).ravel() & 1
        if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] % 2:
            raise ValueError("s must be a square 2n x 2n matrix")
        if r.size != s.shape[0]:
            raise ValueError("r must have 2n entries")
        s.setflags(write=False)
        r.setflags(write=False)
        self.n = s.shape[0] // 2
        self.s = s
        self.r = r

    @classmethod
    def identity(cls, n: int) -> "Clifford":
        return cls(np.eye(2 * n, dtype=np.uint8), np.zeros(2 * n, dtype=np.uint8))

    @classmethod
    def from_images(cls, x_images: Sequence[Pauli | str], z_images: Sequence[Pauli | str]) -> "Clifford":
        """Build from the images of X_j and Z_j (Hermitian Paulis, text or objects)."""
        imgs = [Pauli.from_string(p) if isinstance(p, str) else p for p in list(x_images) + list(z_images)]
        n = len(x_images)
        s = np.zeros((2 * n, 2 * n), dtype=np.uint8)
        r = np.zeros(2 * n, dtype=np.uint8)
        for j, p in enumerate(imgs):
            if not p.is_hermitian():
                raise ValueError(f"image {p} is not Hermitian")
            s[:, j] = p.to_vector()
            r[j] = p.phase // 2
        c = cls(s, r)
        if not is_symplectic(c.s):
            raise ValueError("images do not preserve commutation relations")
        return c

    def image(self, j: int) -> Pauli:
        """Image of the j-th basis Pauli (X_0..X_{n-1}, Z_0..Z_{n-1})."""
        return Pauli.from_vector(self.s[:, j], 2 * int(self.r[j]))

    def key(self) -> bytes:
        return self.s.tobytes() + self.r.tobytes()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Clifford):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.s, other.s) and np.array_equal(self.r, other.r)

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        xs = ",".join(str(self.image(j)) for j in range(self.n))
        zs = ",".join(str(self.image(self.n + j)) for j in range(self.n))
        return f"Clifford(X->[{xs}], Z->[{zs}])"

    def is_pauli(self) -> bool:
        return bool(np.array_equal(self.s, np.eye(2 * self.n, dtype=np.uint8)))

    def rows(self):
        """Tableau rows (x-block, z-block, sign) as mutable copies."""
        t = self.s.T.copy()
        return t[:, : self.n].copy(), t[:, self.n:].copy(), self.r.copy()

    @classmethod
    def from_rows(cls, x, z, r) -> "Clifford":
        return cls(np.hstack([x, z]).T, r)


def conjugate(c: Clifford, p: Pauli) -> Pauli:
    """Return ``U(c) p U(c)^dagger`` with its exact phase."""
    if c.n != p.n:
        raise ValueError(f"dimension mismatch: {c.n} vs {p.n}")
    n = c.n
    # p = i^(phase + sum x_j z_j) prod_j X_j^x_j Z_j^z_j  (since Y = i X Z)
    phase = p.phase + int(np.dot(p.x.astype(int), p.z.astype(int)))
    out = Pauli.identity(n)
    for j in range(n):
        if p.x[j]:
            out = multiply(out, c.image(j))
        if p.z[j]:
            out = multiply(out, c.image(n + j))
    return Pauli(out.x, out.z, out.phase + phase)


def compose(a: Clifford, b: Clifford) -> Clifford:
    """The element that applies ``b`` first, then ``a``."""
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")
    n = a.n
    s = np.zeros((2 * n, 2 * n), dtype=np.uint8)
    r = np.zeros(2 * n, dtype=np.uint8)
    for j in range(2 * n):
        img = conjugate(a, b.image(j))
        s[:, j] = img.to_vector()
        r[j] = img.phase // 2
    return Clifford(s, r)


def inverse(c: Clifford) -> Clifford:
    n = c.n
    lam = symplectic_form(n).astype(np.int64)
    s_inv = (lam @ c.s.T.astype(np.int64) @ lam) % 2
    trial = Clifford(s_inv, np.zeros(2 * n, dtype=np.uint8))
    # Sign bits enter linearly: fix them so that c o inverse == identity.
    residual = compose(c, trial)
    return Clifford(s_inv, residual.r)


def symplectic_inner(a: np.ndarray, b: np.ndarray) -> int:
    n = a.size // 2
    return int((np.dot(a[:n], b[n:]) + np.dot(a[n:], b[:n])) % 2)


def random_symplectic(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniformly random element of Sp(2n, GF(2)).

    Builds a symplectic basis ``(v_1, w_1, ..., v_n, w_n)`` one pair at a time.
    Each new vector is a uniformly random vector projected onto the symplectic
    complement of the pairs chosen so far; the projection is linear and onto,
    so the projected vector is uniform on the complement.  Every valid choice
    at every step is therefore equally likely and the resulting matrix is
    uniform over the group.
    """
    pairs: list[tuple[np.ndarray, np.ndarray]] = []

    def project(u: np.ndarray) -> np.ndarray:
        out = u.copy()
        for v, w in pairs:
            if symplectic_inner(u, w):
                out ^= v
            if symplectic_inner(u, v):
                out ^= w
        return out

    for _ in range(n):
        while True:
            v = project(rng.integers(0, 2, 2 * n, dtype=np.uint8))
            if v.any():
                break
        while True:
            w = project(rng.integers(0, 2, 2 * n, dtype=np.uint8))
            if symplectic_inner(v, w) == 1:
                break
        pairs.append((v, w))
    s = np.zeros((2 * n, 2 * n), dtype=np.uint8)
    for j, (v, w) in enumerate(pairs):
        s[:, j] = v
        s[:, n + j] = w
    return s


def uniform_random(n: int, rng: np.random.Generator) -> Clifford:
    """Uniformly random n-qubit Clifford (modulo global phase)."""
    if n < 1:
        raise ValueError("n must be positive")
    return Clifford(random_symplectic(n, rng), rng.integers(0, 2, 2 * n, dtype=np.uint8))


# ---------------------------------------------------------------------------
# gate-level tableau updates

_ONE_QUBIT_IMAGES = {
    "I": ("X", "Z"),
    "X": ("X", "-Z"),
    "Y": ("-X", "-Z"),
    "Z": ("-X", "Z"),
    "H": ("Z", "X"),
    "S": ("Y", "Z"),
    "SDG": ("-Y", "Z"),
    "X90": ("X", "-Y"),
    "Y90": ("-Z", "X"),
}


@lru_cache(maxsize=None)
def _lookup(c_key: bytes):
    s = np.frombuffer(c_key[:4], dtype=np.uint8).reshape(2, 2)
    r = np.frombuffer(c_key[4:], dtype=np.uint8)
    c = Clifford(s, r)
    lx = np.zeros(4, np.uint8)
    lz = np.zeros(4, np.uint8)
    ls = np.zeros(4, np.uint8)
    for x in (0, 1):
        for z in (0, 1):
            img = conjugate(c, Pauli([x], [z]))
            code = 2 * x + z
            lx[code], lz[code], ls[code] = img.x[0], img.z[0], img.phase // 2
    return lx, lz, ls


def one_qubit_clifford(gate: Gate) -> Clifford:
    """Single-qubit Clifford for a one-qubit vocabulary gate."""
    name = gate.name
    if name in ROTATIONS and gate.params:
        theta = gate.params[0]
        quarter = theta / (math.pi / 2)
        k = int(round(quarter))
        if abs(quarter - k) > 1e-12:
            raise NonCliffordGateError(f"{name}({theta}) is not a Clifford gate")
        k %= 4
        base = _named_one_qubit({"X": "X90", "Y": "Y90", "Z": "S"}[name])
        out = Clifford.identity(1)
        for _ in range(k):
            out = compose(base, out)
        return out
    if name in _ONE_QUBIT_IMAGES:
        return _named_one_qubit(name)
    k = _clifford_index(name)
    if k is not None:
        return single_qubit_table().elements[k]
    raise NonCliffordGateError(f"{name} is not a one-qubit Clifford gate")


@lru_cache(maxsize=None)
def _named_one_qubit(name: str) -> Clifford:
    xi, zi = _ONE_QUBIT_IMAGES[name]
    return Clifford.from_images([xi], [zi])


def apply_gate_rows(x: np.ndarray, z: np.ndarray, r: np.ndarray | None, gate: Gate) -> None:
    """Conjugate every row Pauli by ``gate`` in place.

    ``x`` and ``z`` have shape ``(rows, n)``; ``r`` holds sign bits or is
    ``None`` when signs are not tracked.
    """
    name = gate.name
    if name == "CNOT":
        a, b = gate.qubits
        if r is not None:
            r ^= x[:, a] & z[:, b] & (x[:, b] ^ z[:, a] ^ 1)
        x[:, b] ^= x[:, a]
        z[:, a] ^= z[:, b]
    elif name == "CPHASE":
        a, b = gate.qubits
        _hadamard(x, z, r, b)
        apply_gate_rows(x, z, r, Gate("CNOT", (a, b)))
        _hadamard(x, z, r, b)
    elif name == "SWAP":
        a, b = gate.qubits
        x[:, [a, b]] = x[:, [b, a]]
        z[:, [a, b]] = z[:, [b, a]]
    elif name == "H":
        _hadamard(x, z, r, gate.qubits[0])
    elif name == "I":
        return
    else:
        lx, lz, ls = _lookup(one_qubit_clifford(gate).key())
        q = gate.qubits[0]
        code = 2 * x[:, q] + z[:, q]
        if r is not None:
            r ^= ls[code]
        x[:, q] = lx[code]
        z[:, q] = lz[code]


def _hadamard(x, z, r, q):
    if r is not None:
        r ^= x[:, q] & z[:, q]
    tmp = x[:, q].copy()
    x[:, q] = z[:, q]
    z[:, q] = tmp


def apply_layer(c: Clifford, layer) -> Clifford:
    """The Clifford obtained by running ``c`` and then ``layer``."""
    x, z, r = c.rows()
    for g in layer:
        apply_gate_rows(x, z, r, g)
    return Clifford.from_rows(x, z, r)


def gate_clifford(gate: Gate, n: int) -> Clifford:
    return apply_layer(Clifford.identity(n), (gate,))


def net_clifford(circuit: Circuit) -> Clifford:
    """Group element implemented by a circuit of Clifford gates."""
    x, z, r = Clifford.identity(circuit.n).rows()
    for layer in circuit.layers:
        for g in layer:
            apply_gate_rows(x, z, r, g)
    return Clifford.from_rows(x, z, r)


def layer_symplectic(layer, n: int) -> np.ndarray:
    """Sign-free symplectic matrix of a layer (columns are images)."""
    x, z, _ = Clifford.identity(n).rows()
    for g in layer:
        apply_gate_rows(x, z, None, g)
    return np.hstack([x, z]).T.copy()


# ---------------------------------------------------------------------------
# the 24-element single-qubit group

class CliffordGroupTable:
    """The single-qubit Clifford group in canonical (s, r) lexicographic order."""

    def __init__(self):
        elements = []
        for bits in range(16):
            s = np.array([(bits >> 3) & 1, (bits >> 2) & 1, (bits >> 1) & 1, bits & 1], dtype=np.uint8).reshape(2, 2)
            if not is_symplectic(s):
                continue
            for rb in range(4):
                elements.append(Clifford(s, [(rb >> 1) & 1, rb & 1]))
        elements.sort(key=lambda c: tuple(c.s.ravel()) + tuple(c.r))
        self.elements: list[Clifford] = elements
        self.index = {c.key(): i for i, c in enumerate(elements)}
        size = len(elements)
        self.cayley = np.zeros((size, size), dtype=np.int64)
        for i, a in enumerate(elements):
            for j, b in enumerate(elements):
                self.cayley[i, j] = self.index[compose(a, b).key()]
        self.identity_index = self.index[Clifford.identity(1).key()]
        self.inverse = np.array([int(np.where(self.cayley[i] == self.identity_index)[0][0]) for i in range(size)])
        self.words = self._shortest_words()

    def _shortest_words(self) -> list[tuple[str, ...]]:
        """Shortest words over {H, S} (applied left to right) for each element."""
        words: dict[int, tuple[str, ...]] = {self.identity_index: ()}
        frontier = [self.identity_index]
        gens = {"H": self.index[_named_one_qubit("H").key()], "S": self.index[_named_one_qubit("S").key()]}
        while frontier:
            nxt = []
            for i in frontier:
                for name, g in gens.items():
                    j = int(self.cayley[g, i])
                    if j not in words:
                        words[j] = words[i] + (name,)
                        nxt.append(j)
            frontier = nxt
        return [words[i] for i in range(len(self.elements))]

    def lookup(self, c: Clifford) -> int:
        return self.index[c.key()]

    def __len__(self) -> int:
        return len(self.elements)


@lru_cache(maxsize=None)
def single_qubit_table() -> CliffordGroupTable:
    return CliffordGroupTable()
