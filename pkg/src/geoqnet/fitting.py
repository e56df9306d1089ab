"""Parametric fits of degree distributions and size scaling.

* Poisson degree law with a free mean (closed-form MLE) and a pooled
  chi-square goodness-of-fit test.
* One- and two-component Gaussian densities fitted to a binned degree density
  by bounded nonlinear least squares.
* Power law ``value = prefactor * N**delta`` by least squares in log-log space.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import optimize, stats

from .errors import FitError
from .metrics import DegreeHistogram

MAX_EVAL = 2000
FTOL = 1e-12
_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class PoissonFit:
    lam: float
    chi2: float
    dof: int
    p_value: float

    def report(self) -> dict:
        return {"model": "poisson", "params": {"lambda": self.lam},
                "residual": self.chi2, "p_value": self.p_value}


@dataclass(frozen=True)
class GaussianFit:
    amplitude: float
    mu: float
    sigma: float
    residual: float
    evaluations: int

    def report(self) -> dict:
        params = {k: v for k, v in asdict(self).items() if k not in ("residual", "evaluations")}
        return {"model": "gaussian", "params": params, "residual": self.residual,
                "p_value": None}


@dataclass(frozen=True)
class TwoGaussianFit:
    a1: float
    mu1: float
    sigma1: float
    a2: float
    mu2: float
    sigma2: float
    residual: float
    evaluations: int

    def __call__(self, x):
        return (_gauss(x, self.a1, self.mu1, self.sigma1)
                + _gauss(x, self.a2, self.mu2, self.sigma2))

    def report(self) -> dict:
        params = {k: v for k, v in asdict(self).items() if k not in ("residual", "evaluations")}
        return {"model": "two_gaussian", "params": params, "residual": self.residual,
                "p_value": None}


@dataclass(frozen=True)
class PowerLawFit:
    delta: float
    prefactor: float
    r2: float
    n_points: int

    def __call__(self, n):
        return self.prefactor * np.asarray(n, dtype=float) ** self.delta

    def report(self) -> dict:
        return {"model": "power_law",
                "params": {"delta": self.delta, "prefactor": self.prefactor, "r2": self.r2},
                "residual": 1.0 - self.r2, "p_value": None}


# --- Poisson ---------------------------------------------------------------------


def _pool(observed, expected, minimum=5.0):
    groups_o, groups_e = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= minimum:
            groups_o.append(acc_o)
            groups_e.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 or acc_o > 0:
        if groups_e:
            groups_o[-1] += acc_o
            groups_e[-1] += acc_e
        else:
            groups_o.append(acc_o)
            groups_e.append(acc_e)
    return np.array(groups_o), np.array(groups_e)


def fit_poisson(hist: DegreeHistogram) -> PoissonFit:
    """Poisson fit with ``lambda`` = sample mean degree.

    Goodness of fit is Pearson's chi-square over degree classes pooled
    left-to-right until each expected count reaches 5; one degree of freedom
    is removed for the estimated mean.
    """
    lam = hist.mean_degree
    if not lam > 0:
        raise FitError("all degrees are zero; Poisson mean is undefined")
    n = hist.n_nodes
    kmax = max(hist.counts)
    ks = np.arange(kmax + 1)
    observed = np.array([hist.counts.get(int(k), 0) for k in ks] + [0], dtype=float)
    expected = n * np.append(stats.poisson.pmf(ks, lam), stats.poisson.sf(kmax, lam))
    obs, exp = _pool(observed, expected)
    chi2 = float(np.sum((obs - exp) ** 2 / exp))
    dof = len(obs) - 2
    p = float(stats.chi2.sf(chi2, dof)) if dof >= 1 else float("nan")
    return PoissonFit(lam=lam, chi2=chi2, dof=dof, p_value=p)


# --- Gaussian mixtures -----------------------------------------------------------


def _gauss(x, amp, mu, sigma):
    z = (np.asarray(x, dtype=float) - mu) / sigma
    return amp * np.exp(-0.5 * z * z) / (sigma * _SQRT_2PI)


@dataclass(frozen=True)
class _Bounds:
    """Box for each component: ``amp >= 0``, ``lo <= mu <= hi``, ``0 < sigma <= smax``.

    Without these limits a single Gaussian fitted to a rising histogram
    tail drifts off to ``mu, sigma -> inf`` and has no finite optimum.
    """

    lo: float
    hi: float
    smax: float

    @classmethod
    def for_histogram(cls, hist: DegreeHistogram) -> "_Bounds":
        lo, hi = float(hist.bin_edges[0]), float(hist.bin_edges[-1])
        return cls(lo, hi, hi - lo)

    @property
    def smin(self) -> float:
        return 1e-6 * self.smax

    def box(self, n_comp: int):
        lower = [0.0, self.lo, self.smin] * n_comp
        upper = [np.inf, self.hi, self.smax] * n_comp
        return lower, upper

    def clip(self, theta):
        lower, upper = self.box(len(theta) // 3)
        span = np.subtract(upper, lower, where=np.isfinite(upper), out=np.ones(len(theta)))
        # strictly interior starting point, as the trust-region solver requires
        return np.clip(theta, np.add(lower, 1e-9 * span), np.subtract(upper, 1e-9 * span))


def _mixture(theta, x):
    t = np.asarray(theta).reshape(-1, 3)
    return sum(_gauss(x, a, m, s) for a, m, s in t)


def _mixture_jacobian(theta, x):
    cols = []
    for amp, mu, sig in np.asarray(theta).reshape(-1, 3):
        z = (x - mu) / sig
        g = np.exp(-0.5 * z * z) / (sig * _SQRT_2PI)
        cols += [g, amp * g * z / sig, amp * g * (z * z - 1.0) / sig]
    return np.column_stack(cols)


def _least_squares(theta0, x, y, bounds: _Bounds):
    """Bounded nonlinear least squares; returns (theta, sse, evaluations, converged)."""
    res = optimize.least_squares(
        lambda t: _mixture(t, x) - y, bounds.clip(np.asarray(theta0, dtype=float)),
        jac=lambda t: _mixture_jacobian(t, x), bounds=bounds.box(len(theta0) // 3),
        method="trf", x_scale="jac", ftol=FTOL, xtol=FTOL, gtol=FTOL, max_nfev=MAX_EVAL)
    sse = float(res.fun @ res.fun)
    return res.x, sse, int(res.nfev), bool(res.status > 0)


def _split_init(k, cut):
    lo = k <= cut
    if lo.all() or not lo.any():
        lo = k < cut
    if lo.all() or not lo.any():
        # point mass: two identical half-weight components
        return np.array([0.5, k[0], 0.5, 0.5, k[0], 0.5])
    parts = []
    for grp in (k[lo], k[~lo]):
        parts += [grp.size / k.size, float(grp.mean()), max(float(grp.std()), 0.5)]
    return np.array(parts)


def fit_gaussian(hist: DegreeHistogram) -> GaussianFit:
    """Single Gaussian density fitted to the binned degree density.

    The centre is kept inside the histogram range and the width below its span.
    """
    x, y = hist.bin_centers, hist.density
    k = hist.degree_array().astype(float)
    bounds = _Bounds.for_histogram(hist)
    theta, sse, nfev, ok = _least_squares([1.0, k.mean(), max(k.std(), 0.5)], x, y, bounds)
    if not ok:
        raise FitError("single Gaussian fit did not converge", theta, sse)
    return GaussianFit(float(theta[0]), float(theta[1]), float(theta[2]), sse, nfev)


def _to_two_fit(theta, sse, nfev) -> TwoGaussianFit:
    t = np.asarray(theta).reshape(2, 3)
    (a1, m1, s1), (a2, m2, s2) = t[np.argsort(t[:, 1], kind="stable")]
    return TwoGaussianFit(float(a1), float(m1), float(s1), float(a2), float(m2), float(s2),
                          sse, nfev)


def fit_two_gaussian(hist: DegreeHistogram,
                     single: GaussianFit | None = None) -> TwoGaussianFit:
    """Two-component Gaussian density fitted to the binned degree density.

    Starts from a median split of the degrees (mean, std and mass of each
    half); a quartile split is tried if that does not converge. The result is
    never worse than the single-Gaussian fit: when it would be, the solver is
    restarted from the single-Gaussian optimum split into two halves.
    """
    x, y = hist.bin_centers, hist.density
    if np.count_nonzero(hist.density) < 6:
        raise FitError("two-Gaussian fit needs at least 6 populated bins")
    k = np.sort(hist.degree_array().astype(float))
    bounds = _Bounds.for_histogram(hist)

    best = None
    last = None
    for cut in (np.median(k), np.quantile(k, 0.25)):
        theta, sse, nfev, ok = _least_squares(_split_init(k, cut), x, y, bounds)
        last = (theta, sse)
        if ok:
            best = (theta, sse, nfev)
            break

    if single is None:
        try:
            single = fit_gaussian(hist)
        except FitError:
            single = None
    if single is not None and (best is None or best[1] > single.residual):
        # exact single optimum plus an empty second component, so the start is
        # already as good as the single fit and the solver can only improve it
        theta0 = [single.amplitude, single.mu, single.sigma, 0.0, single.mu, single.sigma]
        theta, sse, nfev, ok = _least_squares(theta0, x, y, bounds)
        if best is None or sse < best[1]:
            best = (theta, sse, nfev)
    if best is None:
        raise FitError("two-Gaussian fit did not converge", last[0], last[1])
    return _to_two_fit(*best)


# --- power law -------------------------------------------------------------------


def fit_power_law(points) -> PowerLawFit:
    """Least-squares fit of ``log(value) = log(prefactor) + delta * log(N)``."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) < 3:
        raise FitError("power-law fit needs at least 3 points")
    if np.any(pts <= 0) or not np.all(np.isfinite(pts)):
        raise FitError("power-law fit needs finite positive N and values")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    dx, dy = lx - lx.mean(), ly - ly.mean()
    sxx = float(dx @ dx)
    if sxx == 0:
        raise FitError("power-law fit needs at least two distinct N values")
    delta = float(dx @ dy) / sxx
    intercept = float(ly.mean() - delta * lx.mean())
    ss_res = float(np.sum((ly - intercept - delta * lx) ** 2))
    ss_tot = float(dy @ dy)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return PowerLawFit(delta=delta, prefactor=math.exp(intercept), r2=r2, n_points=len(pts))
