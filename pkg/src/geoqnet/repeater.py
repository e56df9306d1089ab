"""Entanglement-distribution times and repetition rates over network paths.

A route of ``m`` hops and total length ``L`` is treated as ``m`` equal
segments of length ``L0 = L / m``. Each segment succeeds per attempt with
probability ``P0 = 10 ** (-gamma L0 / 10)``; one attempt takes
``T0 = 2 L0 / c``. With ideal memories and deterministic swapping the end
nodes are entangled once every segment has succeeded, which takes
``Z_m(P0)`` attempts on average (the mean of the maximum of ``m``
independent geometric variables), so the rate is ``1 / (T0 Z_m(P0))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csgraph

from .errors import ConfigError, DegeneratePathError, NoPathError
from .metrics import KM_RTOL, MODES, PathTable, connected_components, histogram, path_table
from .netgen import Graph

EPS = np.finfo(float).eps

# inclusion-exclusion is used up to this many segments
MAX_ALTERNATING_M = 30
ALT_REL_ERR = 1e-9
TAIL_TOL = 1e-12
MAX_SURVIVAL_TERMS = 1_000_000
_T_BLOCK = 4096
_BLOCK_CELLS = 2_000_000


@dataclass(frozen=True)
class RepeaterParams:
    gamma_db_per_km: float = 0.2
    c_m_per_s: float = 2e8

    def __post_init__(self):
        if not self.c_m_per_s > 0:
            raise ConfigError("signal speed c must be > 0")
        if not self.gamma_db_per_km > 0:
            raise ConfigError("gamma must be > 0")


@dataclass(frozen=True)
class PathResult:
    u: int
    v: int
    mode: str
    m: int
    length_km: float
    nodes: tuple[int, ...] = ()

    @property
    def segment_km(self) -> float:
        return self.length_km / self.m


@dataclass(frozen=True)
class RateResult:
    p0: float
    t0_s: float
    z: float
    mean_time_s: float
    rate_hz: float


# --- path selection ----------------------------------------------------------------


def select_path(g: Graph, u: int, v: int, mode: str) -> PathResult:
    """Optimal route from ``u`` to ``v``; ties go to the smallest node sequence."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if u == v:
        raise ValueError("endpoints must differ")
    comp = connected_components(g)
    if comp.labels[u] != comp.labels[v]:
        raise NoPathError(f"nodes {u} and {v} are not connected")
    adj = g.adjacency()
    adj.sort_indices()
    if mode == "km" and np.any(adj.data <= 0):
        raise ValueError("km routing requires strictly positive edge lengths")
    dist = csgraph.shortest_path(adj, method="D", directed=False,
                                 unweighted=(mode == "hops"), indices=v)
    nodes = [u]
    legs = []
    cur = u
    while cur != v:
        lo, hi = adj.indptr[cur], adj.indptr[cur + 1]
        nb, w = adj.indices[lo:hi], adj.data[lo:hi]
        if mode == "hops":
            pick = int(np.argmax(dist[nb] == dist[cur] - 1.0))
        else:
            via = w + dist[nb]
            ok = np.abs(via - dist[cur]) <= KM_RTOL * dist[cur]
            pick = int(np.argmax(ok)) if ok.any() else int(np.argmin(via))
        cur = int(nb[pick])
        nodes.append(cur)
        legs.append(float(w[pick]))
    return PathResult(u, v, mode, len(legs), math.fsum(legs), tuple(nodes))


# --- Z_m(P) --------------------------------------------------------------------------


def _check_mp(m, p):
    if np.any(m < 1):
        raise ValueError("number of segments must be >= 1")
    if np.any(~(p > 0)) or np.any(p > 1):
        raise ValueError("success probability must lie in (0, 1]")


def _survival_sum_array(m: np.ndarray, p: np.ndarray) -> np.ndarray:
    """sum_{t>=0} [1 - (1 - q**t)**m], truncated when m q**t / p < TAIL_TOL."""
    out = np.ones(len(m))
    todo = np.flatnonzero(p < 1)
    if todo.size == 0:
        return out
    lq = np.log1p(-p[todo])
    mm = m[todo].astype(float)
    # first t with m q^t / p below the tail tolerance
    t_stop = np.floor(np.log(TAIL_TOL * p[todo] / mm) / lq).astype(np.int64) + 1
    t_stop = np.maximum(t_stop, 1)
    acc = np.zeros(todo.size)
    comp = np.zeros(todo.size)
    active = np.arange(todo.size)
    start = 0
    while active.size:
        width = int(min(_T_BLOCK, max(64, _BLOCK_CELLS // active.size)))
        t = start + np.arange(width)
        qt = np.exp(t[None, :] * lq[active, None])
        with np.errstate(divide="ignore"):
            terms = -np.expm1(mm[active, None] * np.log1p(-qt))
        terms[t[None, :] >= t_stop[active, None]] = 0.0
        block = terms.sum(axis=1)
        # Neumaier accumulation across blocks
        s = acc[active] + block
        big = np.abs(acc[active]) >= np.abs(block)
        comp[active] += np.where(big, (acc[active] - s) + block, (block - s) + acc[active])
        acc[active] = s
        start += width
        active = active[t_stop[active] > start]
    out[todo] = acc + comp
    return out


def _order_statistics_array(m: int, p: np.ndarray) -> np.ndarray:
    """Exact expectation via the remaining-segments recursion.

    With ``k`` segments still pending, one attempt finishes ``j`` of them with
    binomial probability, so ``E_k (1 - q**k) = 1 + sum_{j=1}^{k-1} B(j; k, p) E_{k-j}``.
    Every term is positive, so the recursion is stable for any ``m`` and ``p``.
    """
    lq = np.log1p(-p)
    expected = [np.zeros(len(p))]
    for k in range(1, m + 1):
        acc = np.ones(len(p))
        for j in range(1, k):
            with np.errstate(under="ignore"):
                acc += math.comb(k, j) * p ** j * np.exp((k - j) * lq) * expected[k - j]
        expected.append(acc / -np.expm1(k * lq))
    return expected[m]


def _alternating_sum_array(m: int, p: np.ndarray):
    """Inclusion-exclusion sum for a fixed ``m`` with a rounding-error estimate."""
    lq = np.log1p(-p)
    s = np.zeros(len(p))
    comp = np.zeros(len(p))
    mag = np.zeros(len(p))
    for j in range(1, m + 1):
        with np.errstate(divide="ignore"):
            term = math.comb(m, j) / -np.expm1(j * lq)
        if j % 2 == 0:
            term = -term
        t = s + term
        big = np.abs(s) >= np.abs(term)
        comp += np.where(big, (s - t) + term, (term - t) + s)
        s = t
        mag += np.abs(term)
    total = s + comp
    # each term carries a few ulps from comb/expm1/division
    err = 4.0 * EPS * mag + EPS * np.abs(total)
    return total, err


def z_steps_array(m, p) -> np.ndarray:
    """Vectorised :func:`z_steps` over matching arrays of ``m`` and ``p``."""
    m = np.asarray(m, dtype=np.int64)
    p = np.asarray(p, dtype=float)
    m, p = np.broadcast_arrays(m, p)
    shape = m.shape
    m, p = m.ravel(), p.ravel()
    _check_mp(m, p)
    out = np.ones(m.size)
    need_sum = p < 1
    fallback = need_sum & (m > MAX_ALTERNATING_M)
    alt = need_sum & ~fallback
    for mm in np.unique(m[alt]):
        idx = np.flatnonzero(alt & (m == mm))
        total, err = _alternating_sum_array(int(mm), p[idx])
        ok = err <= ALT_REL_ERR * np.abs(total)
        out[idx[ok]] = total[ok]
        fallback[idx[~ok]] = True
    if fallback.any():
        # the survival sum needs ~log(1e12 m / p) / p terms; very small p
        # switches to the O(m^2) recursion instead
        terms_needed = np.zeros(m.size)
        terms_needed[fallback] = (np.log(m[fallback] * 1e12 / p[fallback])
                                  / -np.log1p(-p[fallback]))
        long_sum = fallback & (terms_needed > MAX_SURVIVAL_TERMS)
        idx = np.flatnonzero(fallback & ~long_sum)
        if idx.size:
            out[idx] = _survival_sum_array(m[idx], p[idx])
        for mm in np.unique(m[long_sum]):
            idx = np.flatnonzero(long_sum & (m == mm))
            out[idx] = _order_statistics_array(int(mm), p[idx])
    return out.reshape(shape)


def z_steps(m: int, p: float) -> float:
    """Expected number of attempts until all ``m`` segments have succeeded.

    Evaluates ``sum_j C(m,j) (-1)**(j+1) / (1 - (1-p)**j)`` with compensated
    summation. For ``m > 30``, or when the estimated rounding error exceeds
    ``1e-9`` of the result, the survival-sum form is used instead, unless
    ``p`` is so small that the sum would need more than ``MAX_SURVIVAL_TERMS``
    terms; then the exact order-statistics recursion is used.
    """
    if isinstance(m, bool) or int(m) != m:
        raise ValueError("m must be an integer")
    if not (p > 0):
        raise ValueError(f"success probability must be > 0, got {p}")
    return float(z_steps_array(np.array([int(m)]), np.array([float(p)]))[0])


def z_survival_sum(m: int, p: float) -> float:
    """Reference evaluation ``sum_{t>=0} [1 - (1 - (1-p)**t)**m]`` with ``math.fsum``.

    Truncated once the remaining tail, bounded by ``m (1-p)**t / p``, drops
    below ``1e-12``.
    """
    if m < 1 or not (0 < p <= 1):
        raise ValueError("need m >= 1 and 0 < p <= 1")
    if p == 1:
        return 1.0
    lq = math.log1p(-p)
    terms = []
    t = 0
    while True:
        qt = math.exp(t * lq)
        terms.append(-math.expm1(m * math.log1p(-qt)) if qt < 1 else 1.0)
        t += 1
        if m * math.exp(t * lq) / p < TAIL_TOL:
            break
    return math.fsum(terms)


def z_monte_carlo_oracle(m: int, p: float, trials: int, rng: np.random.Generator,
                         chunk: int = 200_000) -> tuple[float, float]:
    """Sample mean and standard error of the slowest of ``m`` geometric waits."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < trials:
        k = min(chunk, trials - done)
        worst = rng.geometric(p, size=(k, m)).max(axis=1).astype(float)
        total += worst.sum()
        total_sq += (worst * worst).sum()
        done += k
    mean = total / trials
    if trials < 2:
        return mean, float("nan")
    var = max(total_sq / trials - mean * mean, 0.0) * trials / (trials - 1)
    return mean, math.sqrt(var / trials)


# --- times and rates -----------------------------------------------------------------


def segment_success_prob(segment_km, gamma: float):
    return 10.0 ** (-gamma * np.asarray(segment_km, dtype=float) / 10.0)


def mean_time_and_rate(path: PathResult, params: RepeaterParams) -> RateResult:
    if path.m < 1:
        raise ValueError("path must have at least one segment")
    if not path.length_km > 0:
        raise DegeneratePathError(f"path {path.u}->{path.v} has zero length")
    l0 = path.length_km / path.m
    p0 = float(segment_success_prob(l0, params.gamma_db_per_km))
    t0 = 2.0 * l0 * 1000.0 / params.c_m_per_s
    z = z_steps(path.m, p0)
    t = t0 * z
    return RateResult(p0=p0, t0_s=t0, z=z, mean_time_s=t, rate_hz=1.0 / t)


@dataclass(frozen=True)
class RateSummary:
    """Per-pair rates over the giant cluster (pairs ``u < v``) and their mean."""

    mode: str
    n_giant: int
    u: np.ndarray
    v: np.ndarray
    m: np.ndarray
    length_km: np.ndarray
    p0: np.ndarray
    mean_time_s: np.ndarray
    rates: np.ndarray
    avg_rate_hz: float

    @property
    def n_pairs(self) -> int:
        return len(self.rates)

    def histogram(self, bins=40):
        return histogram(self.rates, bins)

    def summary(self, bins=40) -> dict:
        lo, hi, dens = self.histogram(bins)
        return {"mode": self.mode, "n_giant": self.n_giant, "avg_rate_hz": self.avg_rate_hz,
                "histogram": {"bin_lo": lo.tolist(), "bin_hi": hi.tolist(),
                              "density": dens.tolist()}}


def rates_from_table(table: PathTable, params: RepeaterParams) -> RateSummary:
    iu, iv = np.triu_indices(table.n, k=1)
    m = table.hops[iu, iv]
    length = table.km[iu, iv]
    if np.any(length <= 0):
        raise DegeneratePathError("coincident nodes give a zero-length path")
    l0 = length / m
    p0 = segment_success_prob(l0, params.gamma_db_per_km)
    t0 = 2.0 * l0 * 1000.0 / params.c_m_per_s
    t_mean = t0 * z_steps_array(m, p0)
    rates = 1.0 / t_mean
    avg = math.fsum(rates) / len(rates)
    return RateSummary(table.mode, table.n, table.members[iu], table.members[iv], m, length,
                       p0, t_mean, rates, avg)


def network_rates(g: Graph, mode: str, params: RepeaterParams, workers: int = 1) -> RateSummary:
    """Rates for every giant-cluster pair and their average."""
    return rates_from_table(path_table(g, mode, workers=workers), params)
