"""Superchannel theory of the direct RB decay.

* The regular-representation matrix ``sum_G Omega(G) R(G) kron G_noisy``
  tracks the ideal net group element next to the noisy superoperator, and its
  powers give the exact average success probability.
* The L matrix ``sum_G Omega(G) G kron G_noisy`` is an imperfect twirl; its
  second eigenvalue ``gamma`` predicts the decay and ``r_gamma``.
* ``verify_prop3`` and ``gauge_invariant_infidelity`` check numerically that
  the eigen-operator combination built from the 1 and ``gamma`` eigenvectors
  is intertwined with the depolarizing channel, and that the infidelity in
  that gauge equals ``r_gamma``.

Stacking is column-major throughout, so ``vec(A X B) = (B^T kron A) vec(X)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .analysis import fit_arrays, rate_from_p
from .clifford import single_qubit_table
from .noise import ErrorModel
from .superop import Ptm, choi_trace_norm, entanglement_infidelity, ptm_of_clifford, ptm_of_unitary, state_vector

MAX_LMATRIX_QUBITS = 2
GAMMA_IMAG_TOL = 1e-8
DEGENERACY_TOL = 1e-9


class TheoryError(RuntimeError):
    pass


def _vec(m):
    return np.asarray(m).flatten(order="F")


def _unvec(v, dim):
    return np.asarray(v).reshape((dim, dim), order="F")


def _key(m: np.ndarray) -> bytes:
    return (np.round(m, 8) + 0.0).tobytes()


@dataclass
class NoisyGateSet:
    """Ideal and as-implemented PTMs of the gates sampled with weights ``weights``."""

    n: int
    ideal: list
    noisy: list
    weights: np.ndarray
    labels: list = field(default_factory=list)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if not (len(self.ideal) == len(self.noisy) == len(self.weights)):
            raise ValueError("ideal, noisy and weights must have equal length")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1) > 1e-12:
            raise ValueError("weights are not a probability vector")
        self.ideal = [np.asarray(m, dtype=float) for m in self.ideal]
        self.noisy = [np.asarray(m, dtype=float) for m in self.noisy]
        if not self.labels:
            self.labels = [f"g{i}" for i in range(len(self.ideal))]

    @classmethod
    def from_layers(cls, layers: Sequence, weights: Sequence[float], model: ErrorModel | None,
                    n: int = 1) -> "NoisyGateSet":
        ideal = [ptm_of_unitary(tuple(layer), n).m for layer in layers]
        if model is None:
            noisy = [m.copy() for m in ideal]
        else:
            noisy = [model.layer_error_ptm(tuple(layer)).m @ m for layer, m in zip(layers, ideal)]
        labels = ["|".join(g.name for g in layer) for layer in layers]
        return cls(n, ideal, noisy, weights, labels)

    @classmethod
    def from_sampler(cls, omega, model: ErrorModel | None, n: int = 1) -> "NoisyGateSet":
        pairs = omega.enumerate(n)
        return cls.from_layers([p[0] for p in pairs], [p[1] for p in pairs], model, n)

    def gauge_transformed(self, m: np.ndarray) -> "NoisyGateSet":
        minv = np.linalg.inv(m)
        return NoisyGateSet(self.n, self.ideal, [m @ g @ minv for g in self.noisy], self.weights, self.labels)

    def naive_infidelity(self) -> float:
        """Omega-weighted entanglement infidelity in the given (gauge-variant) representation."""
        return float(sum(w * entanglement_infidelity(Ptm(self.n, gt), Ptm(self.n, g))
                         for w, g, gt in zip(self.weights, self.ideal, self.noisy)))


# ---------------------------------------------------------------------------
# group bookkeeping (single qubit)

@dataclass
class GroupPtms:
    ideal: list
    noisy: list
    identity_index: int
    cayley: np.ndarray
    index: dict  # PTM key -> element index


def clifford_group_ptms(noisy: Sequence | None = None) -> GroupPtms:
    """The 24 single-qubit Cliffords in canonical order with their PTMs.

    ``noisy`` gives as-implemented PTMs in the same order; default perfect.
    """
    table = single_qubit_table()
    ideal = [ptm_of_clifford(c) for c in table.elements]
    noisy = [m.copy() for m in ideal] if noisy is None else [np.asarray(m, dtype=float) for m in noisy]
    return GroupPtms(ideal, noisy, table.identity_index, table.cayley, {_key(m): i for i, m in enumerate(ideal)})


def compiled_group_noisy(gs: NoisyGateSet) -> list:
    """Noisy PTMs of each group element compiled as a shortest word in the gate set."""
    grp = clifford_group_ptms()
    words = {grp.identity_index: (np.eye(4), np.eye(4))}
    frontier = [grp.identity_index]
    while frontier:
        nxt = []
        for i in frontier:
            ideal_i, noisy_i = words[i]
            for g, gt in zip(gs.ideal, gs.noisy):
                j = grp.index.get(_key(g @ ideal_i))
                if j is None:
                    raise TheoryError("gate set contains a non-Clifford gate")
                if j not in words:
                    words[j] = (g @ ideal_i, gt @ noisy_i)
                    nxt.append(j)
        frontier = nxt
    if len(words) != len(grp.ideal):
        raise TheoryError("gate set does not generate the single-qubit Clifford group")
    return [words[i][1] for i in range(len(grp.ideal))]


def regular_rep(index: int, cayley: np.ndarray) -> np.ndarray:
    """Permutation matrix with ``R[j, k] = 1`` iff ``g C_k = C_j``."""
    size = cayley.shape[0]
    r = np.zeros((size, size))
    r[cayley[index], np.arange(size)] = 1.0
    return r


@dataclass
class RMatrix:
    mat: np.ndarray
    group_size: int
    identity_index: int


def build_rmatrix(gs_ideal: Sequence, gs_noisy: Sequence, weights: Sequence[float], grp: GroupPtms) -> RMatrix:
    size = len(grp.ideal)
    dim = gs_ideal[0].shape[0]
    mat = np.zeros((size * dim, size * dim))
    for g, gt, w in zip(gs_ideal, gs_noisy, weights):
        idx = grp.index.get(_key(np.asarray(g)))
        if idx is None:
            raise TheoryError("gate is not an element of the group")
        mat += w * np.kron(regular_rep(idx, grp.cayley), gt)
    return RMatrix(mat, size, grp.identity_index)


def exact_sd_rmatrix(gs: NoisyGateSet, depths: Sequence[int], group_noisy: Sequence | None = None,
                     rho: np.ndarray | None = None, effect: np.ndarray | None = None) -> np.ndarray:
    """Exact average success probabilities for unconditionally compiled circuits.

    The circuit is a uniformly random group element, ``d`` gates drawn from
    Omega and the group element that inverts the sequence, with the all-zeros
    target.  Conditioning the random final element on inverting the sequence
    multiplies the unconditioned average by the group order.
    """
    if gs.n != 1:
        raise TheoryError("the regular-representation computation is implemented for one qubit")
    grp = clifford_group_ptms(group_noisy)
    size, dim = len(grp.ideal), 4 ** gs.n
    rmat = build_rmatrix(gs.ideal, gs.noisy, gs.weights, grp).mat
    rgrp = build_rmatrix(grp.ideal, grp.noisy, np.full(size, 1.0 / size), grp).mat
    rho = state_vector(gs.n) if rho is None else rho
    effect = state_vector(gs.n) if effect is None else effect
    start = np.zeros(size * dim)
    start[grp.identity_index * dim:(grp.identity_index + 1) * dim] = rho
    cur = rgrp @ start
    out = {}
    order = sorted(set(int(d) for d in depths))
    done = 0
    for d in order:
        for _ in range(d - done):
            cur = rmat @ cur
        done = d
        final = rgrp @ cur
        block = final[grp.identity_index * dim:(grp.identity_index + 1) * dim]
        out[d] = size * float(effect @ block)
    return np.array([out[int(d)] for d in depths])


# ---------------------------------------------------------------------------
# L matrix

@dataclass
class LMatrix:
    mat: np.ndarray
    values: np.ndarray  # sorted by descending modulus, then real part
    right: np.ndarray   # columns are right eigenvectors
    left: np.ndarray    # rows are left eigenvectors, left @ right = identity
    n: int
    gs: NoisyGateSet | None = None

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def upper_gap(self) -> float:
        return float(self.moduli[1] - self.moduli[2])


def _eig_sorted(mat: np.ndarray):
    vals, vecs = np.linalg.eig(mat)
    order = np.lexsort((-vals.real, -np.round(np.abs(vals), 12)))
    vals, vecs = vals[order], vecs[:, order]
    try:
        left = np.linalg.inv(vecs)
    except np.linalg.LinAlgError:
        warnings.warn("defective eigensystem; using a pseudo-inverse for the left eigenvectors")
        left = np.linalg.pinv(vecs)
    return vals, vecs, left


def build_lmatrix(gs: NoisyGateSet) -> LMatrix:
    if gs.n > MAX_LMATRIX_QUBITS:
        raise TheoryError(f"L matrices are capped at {MAX_LMATRIX_QUBITS} qubits")
    dim = 4 ** gs.n
    mat = np.zeros((dim * dim, dim * dim))
    for g, gt, w in zip(gs.ideal, gs.noisy, gs.weights):
        mat += w * np.kron(g, gt)
    vals, right, left = _eig_sorted(mat)
    return LMatrix(mat, vals, right, left, gs.n, gs)


def _dep_overlap(vec: np.ndarray, n: int) -> float:
    dim = 4 ** n
    p0 = np.zeros((dim, dim))
    p0[0, 0] = 1.0
    basis = np.array([_vec(p0), _vec(np.eye(dim) - p0) / np.sqrt(dim - 1)])
    v = vec / np.linalg.norm(vec)
    return float(np.linalg.norm(basis @ v))


def select_gamma(l: LMatrix) -> tuple[complex, int, str]:
    """The decay eigenvalue: the second in modulus, with a fallback for complex pairs."""
    if len(l.values) < 3 or l.upper_gap <= DEGENERACY_TOL:
        raise TheoryError("upper spectral gap is closed")
    g = l.values[1]
    if abs(g.imag) < GAMMA_IMAG_TOL:
        return g, 1, ""
    real_idx = [i for i in range(1, len(l.values)) if abs(l.values[i].imag) < GAMMA_IMAG_TOL]
    if not real_idx:
        raise TheoryError("no real eigenvalue available for the decay constant")
    best = max(real_idx, key=lambda i: _dep_overlap(l.right[:, i], l.n))
    return l.values[best], best, f"second eigenvalue {g} is complex; using {l.values[best]}"


def r_gamma(l: LMatrix) -> float:
    gamma, _, note = select_gamma(l)
    if note:
        warnings.warn(note)
    return rate_from_p(float(gamma.real), l.n)


# ---------------------------------------------------------------------------
# gauge-invariant identities

def _intertwining_matrix(gs: NoisyGateSet) -> np.ndarray:
    """Stacked form of ``X -> sum_G Omega(G) G^-1 X G_noisy``."""
    dim = 4 ** gs.n
    mat = np.zeros((dim * dim, dim * dim))
    for g, gt, w in zip(gs.ideal, gs.noisy, gs.weights):
        mat += w * np.kron(gt.T, np.linalg.inv(g))
    return mat


def intertwining_map(gs: NoisyGateSet, x: np.ndarray) -> np.ndarray:
    return sum(w * np.linalg.inv(g) @ x @ gt for g, gt, w in zip(gs.ideal, gs.noisy, gs.weights))


def intertwiner(l: LMatrix) -> tuple[np.ndarray, complex]:
    """Eigen-operator sum ``E = E_1 + E_gamma`` of the map ``X -> sum Omega G^-1 X G_noisy``.

    ``E_1 = |B0)(V|`` with ``(V|`` the left 1-eigenvector of the averaged noisy
    gate, scaled so ``V_0 = 1``.  ``E_gamma`` is the eigen-operator for
    ``gamma`` with vanishing first row, scaled so its trace is ``d^2 - 1``;
    both scalings make ``E`` the identity for perfect gates.
    """
    gs = l.gs
    if gs is None:
        raise TheoryError("L matrix was built without its gate set")
    dim = 4 ** gs.n
    gamma, _, _ = select_gamma(l)
    gamma = complex(gamma).real

    avg = sum(w * gt for gt, w in zip(gs.noisy, gs.weights))
    lv, lvec = np.linalg.eig(avg.T)
    k = int(np.argmin(np.abs(lv - 1)))
    v = np.real(lvec[:, k])
    v = v / v[0]
    e1 = np.zeros((dim, dim))
    e1[0, :] = v

    amat = _intertwining_matrix(gs)
    vals, vecs = np.linalg.eig(amat)
    close = np.where(np.abs(vals - gamma) < max(1e-7, 1e-4 * abs(1 - gamma)))[0]
    if len(close) == 0:
        raise TheoryError("gamma not found in the spectrum of the intertwining map")
    basis = np.real(vecs[:, close]) if np.allclose(vecs[:, close].imag, 0, atol=1e-10) else vecs[:, close]
    # pick the combination with zero first row (rows are indexed by the first operator index)
    first_row = np.array([_unvec(basis[:, j], dim)[0, :] for j in range(basis.shape[1])]).T
    if basis.shape[1] == 1:
        coeff = np.array([1.0])
    else:
        _, _, vh = np.linalg.svd(first_row)
        coeff = vh[-1].conj()
    eg = _unvec(basis @ coeff, dim)
    eg = np.real_if_close(eg, tol=1e6)
    if np.iscomplexobj(eg):
        raise TheoryError("gamma eigen-operator is not real")
    tr = np.trace(eg)
    if abs(tr) < 1e-12:
        raise TheoryError("gamma eigen-operator has zero trace; cannot normalize")
    eg = eg * (dim - 1) / tr
    return e1 + eg, gamma


def verify_prop3(l: LMatrix) -> float:
    """``|| Q(E) - D_gamma E ||_F`` for the eigen-operator sum ``E``."""
    e, gamma = intertwiner(l)
    dim = e.shape[0]
    dep = np.diag([1.0] + [gamma] * (dim - 1))
    return float(np.linalg.norm(intertwining_map(l.gs, e) - dep @ e))


def gauge_invariant_infidelity(l: LMatrix) -> float:
    """Omega-weighted infidelity of ``E G_noisy E^-1`` against ``G``."""
    e, _ = intertwiner(l)
    gs = l.gs
    if np.linalg.cond(e) > 1e12:
        e = e + 1e-12 * np.eye(e.shape[0])
    einv = np.linalg.inv(e)
    return float(sum(w * entanglement_infidelity(Ptm(gs.n, e @ gt @ einv), Ptm(gs.n, g))
                     for g, gt, w in zip(gs.ideal, gs.noisy, gs.weights)))


# ---------------------------------------------------------------------------
# spectral expansion and the approximation bound

@dataclass
class SpectralExpansion:
    gammas: np.ndarray
    omegas: np.ndarray
    delta_proxy: float
    tail: float  # sum of |omega_k| for k >= 3

    def predict(self, depths) -> np.ndarray:
        d = np.asarray(depths, dtype=float)
        return np.real(np.array([np.sum(self.omegas * self.gammas ** k) for k in d]))


def error_maps(group_noisy: Sequence, group_ideal: Sequence) -> list:
    return [np.asarray(ct) @ np.linalg.inv(c) for ct, c in zip(group_noisy, group_ideal)]


def delta_proxy(group_noisy: Sequence, group_ideal: Sequence, n: int = 1) -> float:
    """``sum_C Pi(C) || J(Lambda_bar - Lambda(C)) ||_1`` with uniform Pi.

    This lower-bounds the diamond-norm quantity and is itself bounded below
    it by at most a factor ``2**n``.
    """
    lams = error_maps(group_noisy, group_ideal)
    bar = sum(lams) / len(lams)
    return float(np.mean([choi_trace_norm(Ptm(n, bar - lam)) for lam in lams]))


def spectral_expansion(l: LMatrix, l_group: LMatrix, group_noisy: Sequence | None = None,
                       rho: np.ndarray | None = None, effect: np.ndarray | None = None) -> SpectralExpansion:
    """Coefficients of ``S_d ~ sum_k omega_k gamma_k**d``.

    ``omega_k = (E| unvec[L_group P_k vec(I)] Lambda_bar |rho)`` with
    ``P_k`` the spectral projector of ``gamma_k``.
    """
    n = l.n
    dim = 4 ** n
    grp = clifford_group_ptms(group_noisy)
    lam_bar = sum(error_maps(grp.noisy, grp.ideal)) / len(grp.ideal)
    rho = state_vector(n) if rho is None else rho
    effect = state_vector(n) if effect is None else effect
    rho_p = lam_bar @ rho
    vi = _vec(np.eye(dim))
    omegas = np.empty(len(l.values), dtype=complex)
    for k in range(len(l.values)):
        proj_vi = l.right[:, k] * (l.left[k] @ vi)
        sup = _unvec(l_group.mat @ proj_vi, dim)
        omegas[k] = effect @ sup @ rho_p
    prox = delta_proxy(grp.noisy, grp.ideal, n)
    return SpectralExpansion(l.values, omegas, prox, float(np.sum(np.abs(omegas[2:]))))


def group_lmatrix(group_noisy: Sequence | None = None) -> LMatrix:
    grp = clifford_group_ptms(group_noisy)
    size = len(grp.ideal)
    gs = NoisyGateSet(1, grp.ideal, grp.noisy, np.full(size, 1.0 / size))
    return build_lmatrix(gs)


# ---------------------------------------------------------------------------
# convenience: fitted rate from the exact curve

def log_depths(d_max: int = 1024, count: int = 12) -> np.ndarray:
    d = np.unique(np.round(np.geomspace(1, d_max, count)).astype(int))
    return np.concatenate([[0], d])


def asymptotic_depths(d_min: int = 8, d_max: int = 2048, count: int = 12) -> np.ndarray:
    """Log-spaced depths that skip the first few layers.

    At small d the decay curve still carries terms from the subleading
    eigenvalues, whose amplitudes are of the same order as the error rate, so
    a single-exponential fit that includes them is biased by several percent.
    """
    return np.unique(np.round(np.geomspace(d_min, d_max, count)).astype(int))


def r_omega_exact(gs: NoisyGateSet, depths: Sequence[int] | None = None,
                  group_noisy: Sequence | None = None) -> tuple[float, np.ndarray, np.ndarray]:
    """Rate from an unweighted fit to the exact decay curve (default depths skip the transient)."""
    depths = asymptotic_depths() if depths is None else np.asarray(depths)
    sd = exact_sd_rmatrix(gs, depths, group_noisy)
    fit = fit_arrays(depths, sd, gs.n, fix_A=False)
    return fit.r, depths, sd


@dataclass
class TheoryReport:
    spectrum: list
    upper_gap: float
    gamma: float
    r_gamma: float
    r_omega: float | None
    intertwiner_residual: float
    gauge_invariant_infidelity: float
    naive_infidelity: float
    omegas: list
    tail: float
    delta_proxy: float
    notes: str = ""

    def to_json(self) -> dict:
        return dict(self.__dict__)


def theory_report(gs: NoisyGateSet, group_noisy: Sequence | None = None, with_exact: bool = True) -> TheoryReport:
    l = build_lmatrix(gs)
    gamma, _, note = select_gamma(l)
    lg = group_lmatrix(group_noisy)
    exp = spectral_expansion(l, lg, group_noisy)
    r_om = r_omega_exact(gs, group_noisy=group_noisy)[0] if with_exact and gs.n == 1 else None
    return TheoryReport([[float(z.real), float(z.imag)] for z in l.values], l.upper_gap, float(gamma.real),
                        rate_from_p(float(gamma.real), gs.n), r_om, verify_prop3(l),
                        gauge_invariant_infidelity(l), gs.naive_infidelity(),
                        [[float(z.real), float(z.imag)] for z in exp.omegas], exp.tail, exp.delta_proxy, note)
