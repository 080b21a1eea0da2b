"""Decay fitting, error-rate extraction and bootstrap uncertainties.

The per-depth mean success probabilities are fit to ``A + B p**d`` and the
error rate is ``r = (4**n - 1)(1 - p) / 4**n``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .protocol import RbDataset

DEFAULT_RESAMPLES = 200


class FitError(RuntimeError):
    pass


def rate_from_p(p: float, n: int) -> float:
    d2 = 4 ** n
    return (d2 - 1) * (1 - p) / d2


def p_from_rate(r: float, n: int) -> float:
    d2 = 4 ** n
    return 1 - r * d2 / (d2 - 1)


@dataclass
class FitResult:
    n: int
    A: float
    B: float
    p: float
    r: float
    A_fixed: bool
    residual: float  # weighted sum of squared residuals
    depths: np.ndarray
    means: np.ndarray
    sigmas: np.ndarray
    cov: np.ndarray | None = None
    sigma_r: float | None = None
    interval: tuple | None = None  # percentile interval from the bootstrap
    bootstrap_r: np.ndarray | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if k not in ("bootstrap_r", "cov")}
        for k in ("depths", "means", "sigmas"):
            out[k] = np.asarray(out[k]).tolist()
        if self.interval is not None:
            out["interval"] = [float(x) for x in self.interval]
            out["two_sigma"] = [self.r - 2 * self.sigma_r, self.r + 2 * self.sigma_r]
        out["residuals"] = (np.asarray(self.means) - self.predict(self.depths)).tolist()
        return out

    def predict(self, d) -> np.ndarray:
        return self.A + self.B * self.p ** np.asarray(d, dtype=float)


def _depth_statistics(dataset: RbDataset):
    groups = dataset.by_depth()
    d = np.array(list(groups), dtype=float)
    means, sig = [], []
    for s, n in groups.values():
        freq = s / n
        m = float(np.mean(freq))
        total = float(n.sum())
        # Bernoulli variance per shot, floored so that means at 0 or 1 keep a finite weight
        var = max(m * (1 - m), 1.0 / (4 * total)) / total
        means.append(m)
        sig.append(np.sqrt(var))
    return d, np.array(means), np.array(sig)


def fit_arrays(depths, means, n: int, fix_A: bool = False, sigmas=None) -> FitResult:
    """Weighted least-squares fit of ``A + B p**d`` to per-depth means."""
    d = np.asarray(depths, dtype=float)
    y = np.asarray(means, dtype=float)
    w = np.ones_like(y) if sigmas is None else 1.0 / np.asarray(sigmas, dtype=float)
    distinct = len(np.unique(d))
    if distinct < (2 if fix_A else 3):
        raise FitError(f"{distinct} distinct depths are too few for this fit")
    a0 = 1.0 / 2 ** n

    # log-linear start on the excess over the asymptote guess
    excess = y - a0
    ok = excess > 1e-12
    if ok.sum() >= 2 and len(np.unique(d[ok])) >= 2:
        slope, icpt = np.polyfit(d[ok], np.log(excess[ok]), 1)
        p0 = float(np.clip(np.exp(slope), 1e-6, 1.0))
        b0 = float(np.exp(icpt))
    else:
        p0, b0 = 0.5, float(max(y[0] - a0, 1e-3))

    if fix_A:
        def resid(theta):
            return (a0 + theta[0] * theta[1] ** d - y) * w
        x0 = [b0, p0]
        bounds = ([-np.inf, 0.0], [np.inf, 1.0])
    else:
        def resid(theta):
            return (theta[0] + theta[1] * theta[2] ** d - y) * w
        x0 = [a0, b0, p0]
        # the asymptote is a probability; without this bound slowly decaying data trade A against p
        bounds = ([0.0, -np.inf, 0.0], [1.0, np.inf, 1.0])
    sol = least_squares(resid, x0, bounds=bounds, method="trf", x_scale="jac",
                        ftol=1e-15, xtol=1e-15, gtol=1e-15, max_nfev=10000)
    if not sol.success:
        raise FitError(f"decay fit did not converge: {sol.message}")
    if fix_A:
        A, (B, p) = a0, sol.x
    else:
        A, B, p = sol.x
    cov = None
    try:
        jtj = sol.jac.T @ sol.jac
        cov = np.linalg.pinv(jtj)
    except np.linalg.LinAlgError:
        pass
    sig = np.full_like(y, np.nan) if sigmas is None else np.asarray(sigmas, dtype=float)
    return FitResult(n, float(A), float(B), float(p), rate_from_p(float(p), n), fix_A,
                     float(np.sum(sol.fun ** 2)), d, y, sig, cov)


def fit_decay(dataset: RbDataset, fix_A: bool = False, weighted: bool = True) -> FitResult:
    d, m, s = _depth_statistics(dataset)
    return fit_arrays(d, m, dataset.n, fix_A, s if weighted else None)


def bootstrap(dataset: RbDataset, resamples: int = DEFAULT_RESAMPLES, fix_A: bool = False,
              seed: int = 0, weighted: bool = True) -> FitResult:
    """Fit plus a nonparametric bootstrap over circuits within each depth.

    Returns the point fit with ``sigma_r`` (standard deviation of the refit
    rates) and the 2.5/97.5 percentile ``interval`` filled in.
    """
    groups = dataset.by_depth()
    if any(len(s) < 2 for s, _ in groups.values()):
        raise FitError("bootstrap needs at least two circuits per depth")
    fit = fit_decay(dataset, fix_A, weighted)
    rng = np.random.default_rng(seed)
    depths = np.array(list(groups), dtype=float)
    rates = np.empty(resamples)
    for b in range(resamples):
        means, sig = [], []
        for s, n in groups.values():
            k = rng.integers(0, len(s), len(s))
            freq = s[k] / n[k]
            m = float(np.mean(freq))
            total = float(n[k].sum())
            means.append(m)
            sig.append(np.sqrt(max(m * (1 - m), 1.0 / (4 * total)) / total))
        rates[b] = fit_arrays(depths, means, dataset.n, fix_A, sig if weighted else None).r
    fit.bootstrap_r = rates
    fit.sigma_r = float(np.std(rates, ddof=1))
    fit.interval = (float(np.percentile(rates, 2.5)), float(np.percentile(rates, 97.5)))
    return fit


def relative_error(r_hat: float, epsilon: float) -> float:
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return (r_hat - epsilon) / epsilon


def decay_table(fit: FitResult) -> str:
    """CSV text with columns d, mean success, sigma, fitted curve."""
    lines = ["d,S_d,sigma,fit"]
    for d, m, s, f in zip(fit.depths, fit.means, fit.sigmas, fit.predict(fit.depths)):
        lines.append(f"{int(d)},{m:.12g},{s:.12g},{f:.12g}")
    return "\n".join(lines) + "\n"
