"""Twirling superchannels and unitary 2-design checks.

A superoperator ``E`` (a PTM) is stacked column by column, so conjugation
``G E G^T`` by a unitary PTM ``G`` becomes ``(G kron G) vec(E)``.  The twirl
over a unitary 2-design is the rank-2 projector onto the span of the
completely depolarizing channel and the identity channel.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .clifford import Clifford
from .superop import Ptm, ptm_of_clifford

UNIT_TOL = 1e-9
CLOSURE_CAP = 100_000
QUADRATURE_NODES = 1024


class ClosureError(RuntimeError):
    pass


@dataclass
class GateEntry:
    """A fixed gate (``ptm``) or a one-parameter family (``family``, uniform in theta over [0, 2 pi))."""

    label: str
    ptm: np.ndarray | None = None
    family: Callable[[float], np.ndarray] | None = None

    def __post_init__(self):
        if (self.ptm is None) == (self.family is None):
            raise ValueError("give exactly one of ptm or family")


@dataclass
class GateSet:
    n: int
    gates: list = field(default_factory=list)

    def __post_init__(self):
        if not self.gates:
            raise ValueError("a gate set needs at least one gate")
        dim = 4 ** self.n
        for g in self.gates:
            m = g.ptm if g.ptm is not None else g.family(0.0)
            if np.shape(m) != (dim, dim):
                raise ValueError(f"gate {g.label} does not act on {self.n} qubits")

    def __len__(self) -> int:
        return len(self.gates)

    @classmethod
    def from_ptms(cls, n: int, ptms: Sequence, labels: Sequence[str] | None = None) -> "GateSet":
        labels = labels or [f"g{i}" for i in range(len(ptms))]
        return cls(n, [GateEntry(l, np.asarray(getattr(m, "m", m), dtype=float)) for l, m in zip(labels, ptms)])

    @property
    def is_finite(self) -> bool:
        return all(g.family is None for g in self.gates)

    def fixed_ptms(self) -> list:
        if not self.is_finite:
            raise ValueError("gate set contains a continuous family")
        return [g.ptm for g in self.gates]


def _weights(gs: GateSet, omega) -> np.ndarray:
    if omega is None:
        w = np.full(len(gs), 1.0 / len(gs))
    elif hasattr(omega, "params"):
        w = np.asarray(omega.params["weights"], dtype=float)
    else:
        w = np.asarray(omega, dtype=float)
    if w.shape != (len(gs),):
        raise ValueError("one weight per gate is required")
    if np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
        raise ValueError("omega is not normalized")
    return w


def _vec(m: np.ndarray) -> np.ndarray:
    return np.asarray(m).flatten(order="F")


def _unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape((dim, dim), order="F")


def twirl_matrix(gs: GateSet, omega=None) -> np.ndarray:
    """``sum_G Omega(G) G kron G`` acting on column-stacked PTMs.

    Continuous families are integrated with a midpoint rule on
    ``QUADRATURE_NODES`` equally spaced angles.  The entries of a PTM of a
    rotation family are trigonometric polynomials of degree at most
    ``2**n``, so the tensor square has degree at most ``2**(n+1)`` and the
    rule is exact up to rounding while that stays below the node count.
    """
    w = _weights(gs, omega)
    dim = 4 ** gs.n
    out = np.zeros((dim * dim, dim * dim))
    for wi, g in zip(w, gs.gates):
        if g.ptm is not None:
            out += wi * np.kron(g.ptm, g.ptm)
        else:
            thetas = (np.arange(QUADRATURE_NODES) + 0.5) * 2 * np.pi / QUADRATURE_NODES
            acc = np.zeros_like(out)
            for t in thetas:
                m = g.family(t)
                acc += np.kron(m, m)
            out += wi * acc / QUADRATURE_NODES
    return out


def twirl(gs: GateSet, omega, e: Ptm) -> Ptm:
    """``sum_G Omega(G) G E G^T``."""
    if e.n != gs.n:
        raise ValueError("dimension mismatch")
    dim = 4 ** gs.n
    return Ptm(gs.n, _unvec(twirl_matrix(gs, omega) @ _vec(e.m), dim))


def depolarizing_projector(n: int) -> np.ndarray:
    """Orthogonal projector onto span{|B0)(B0|, 1 - |B0)(B0|} in stacked form."""
    dim = 4 ** n
    p0 = np.zeros((dim, dim))
    p0[0, 0] = 1.0
    v0 = _vec(p0)
    v1 = _vec(np.eye(dim) - p0) / np.sqrt(dim - 1)
    return np.outer(v0, v0) + np.outer(v1, v1)


def _key(m: np.ndarray) -> bytes:
    return (np.round(m, 8) + 0.0).tobytes()


def closure(ptms: Sequence[np.ndarray], cap: int = CLOSURE_CAP) -> list:
    """Group generated by ``ptms`` (breadth-first products), capped at ``cap`` elements."""
    gens = [np.asarray(m, dtype=float) for m in ptms]
    dim = gens[0].shape[0]
    seen = {_key(np.eye(dim)): np.eye(dim)}
    frontier = [np.eye(dim)]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = g @ a
                k = _key(b)
                if k not in seen:
                    seen[k] = b
                    nxt.append(b)
                    if len(seen) > cap:
                        raise ClosureError(f"group closure exceeds {cap} elements")
        frontier = nxt
    return list(seen.values())


def is_closed(ptms: Sequence[np.ndarray]) -> bool:
    keys = {_key(m) for m in ptms}
    return all(_key(a @ b) in keys for a in ptms for b in ptms)


@dataclass
class DesignVerdict:
    verdict: bool
    residual: float | None = None
    spectrum: np.ndarray | None = None
    gap: float | None = None
    unit_count: int | None = None
    notes: str = ""

    def to_json(self) -> dict:
        out = {"verdict": "yes" if self.verdict else "no", "notes": self.notes}
        if self.residual is not None:
            out["residual"] = self.residual
        if self.spectrum is not None:
            out["spectrum"] = [[float(z.real), float(z.imag)] for z in self.spectrum]
            out["upper_gap"] = self.gap
            out["unit_modulus_count"] = self.unit_count
        return out


def is_unitary_2design(elements: Sequence, n: int | None = None) -> DesignVerdict:
    """Whether a finite group of unitary PTMs (or Cliffords) is a unitary 2-design."""
    ptms = [_as_ptm(e) for e in elements]
    if not is_closed(ptms):
        raise ClosureError("elements are not closed under composition")
    n = n if n is not None else int(round(np.log(ptms[0].shape[0]) / np.log(4)))
    t = sum(np.kron(m, m) for m in ptms) / len(ptms)
    resid = float(np.linalg.norm(t - depolarizing_projector(n), 2))
    return DesignVerdict(resid < UNIT_TOL, resid, notes=f"group of order {len(ptms)}")


def _as_ptm(e) -> np.ndarray:
    if isinstance(e, Clifford):
        return ptm_of_clifford(e)
    return np.asarray(getattr(e, "m", e), dtype=float)


def sorted_spectrum(mat: np.ndarray) -> np.ndarray:
    ev = np.linalg.eigvals(mat)
    order = np.lexsort((-ev.real, -np.round(np.abs(ev), 12)))
    return ev[order]


def is_sequence_asymptotic_2design(gs: GateSet, omega=None) -> DesignVerdict:
    """Spectral test: the twirl has exactly two unit-modulus eigenvalues.

    Both belong to the depolarizing subspace, which every unitary twirl fixes,
    so the condition says that subspace is the whole peripheral spectrum.
    """
    w = _weights(gs, omega)
    if np.any(w <= 0):
        raise ValueError("omega must give every gate positive weight")
    t = twirl_matrix(gs, w)
    spec = sorted_spectrum(t)
    mods = np.abs(spec)
    unit = int(np.sum(mods > 1 - UNIT_TOL))
    proj = depolarizing_projector(gs.n)
    fixed_ok = np.allclose(t @ proj, proj, atol=1e-9)
    gap = float(1 - mods[2]) if len(mods) > 2 else 1.0
    ok = unit == 2 and fixed_ok
    note = "" if ok else f"{unit} unit-modulus eigenvalues"
    return DesignVerdict(ok, None, spec, gap, unit, note)


def sequence_power_check(gs: GateSet, omega, k: int, cap: int = CLOSURE_CAP) -> tuple[DesignVerdict, int]:
    """Test whether the group generated by all length-``k`` products is a 2-design.

    Returns the verdict and the group order.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    base = gs.fixed_ptms()
    words = [np.eye(base[0].shape[0])]
    for _ in range(k):
        words = [g @ w for w in words for g in base]
        if len(words) > cap:
            raise ClosureError("too many length-k products")
    uniq = {_key(m): m for m in words}
    group = closure(list(uniq.values()), cap)
    return is_unitary_2design(group, gs.n), len(group)


def convergence_residuals(gs: GateSet, omega, e: Ptm, powers: Sequence[int]) -> list:
    """Distance of ``T^m vec(E)`` from its depolarizing projection for each m."""
    t = twirl_matrix(gs, omega)
    proj = depolarizing_projector(gs.n)
    v = _vec(e.m)
    target = proj @ v
    out, cur, m_done = [], v.copy(), 0
    for m in sorted(powers):
        for _ in range(m - m_done):
            cur = t @ cur
        m_done = m
        out.append(float(np.linalg.norm(cur - target)))
    return out
