import math

import mpmath
import numpy as np
import pytest
from conftest import make_graph
from hypothesis import given, settings
from hypothesis import strategies as st

from geoqnet.errors import DegeneratePathError, NoPathError
from geoqnet.metrics import path_table
from geoqnet.repeater import (
    PathResult,
    RepeaterParams,
    mean_time_and_rate,
    network_rates,
    rates_from_table,
    segment_success_prob,
    select_path,
    z_monte_carlo_oracle,
    z_steps,
    z_steps_array,
    z_survival_sum,
)

P_GRID = (0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9)


def z_exact(m, p, digits=60):
    """High-precision inclusion-exclusion sum (no cancellation at 60 digits)."""
    with mpmath.workdps(digits):
        p = mpmath.mpf(p)
        q = 1 - p
        return float(mpmath.fsum(mpmath.binomial(m, j) * (-1) ** (j + 1) / (1 - q**j)
                                 for j in range(1, m + 1)))


def test_two_route_paths(two_routes):
    h = select_path(two_routes, 0, 2, "hops")
    k = select_path(two_routes, 0, 2, "km")
    assert (h.m, h.length_km, h.nodes) == (2, 60.0, (0, 1, 2))
    assert (k.m, k.length_km, k.nodes) == (3, 30.0, (0, 3, 4, 2))


def test_adjacent_pair(two_routes):
    for mode in ("hops", "km"):
        p = select_path(two_routes, 0, 3, mode)
        assert p.m == 1 and p.length_km == 10.0


def test_disconnected_pair():
    g = make_graph(4, [(0, 1), (2, 3)])
    with pytest.raises(NoPathError):
        select_path(g, 0, 3, "hops")


def test_segment_success_examples():
    assert segment_success_prob(0.0, 0.2) == 1.0
    assert segment_success_prob(50.0, 0.2) == pytest.approx(0.1, rel=1e-14)
    assert segment_success_prob(10.0, 0.2) == pytest.approx(0.63096, abs=1e-5)


def test_z_examples():
    for m in (1, 2, 7, 40, 64):
        assert z_steps(m, 1.0) == 1.0
    assert z_steps(1, 0.1) == pytest.approx(10.0, rel=1e-14)
    assert z_steps(2, 0.5) == pytest.approx(8 / 3, rel=1e-14)


@pytest.mark.parametrize("p", [0.0, -0.1, 1.1])
def test_z_domain(p):
    with pytest.raises(ValueError):
        z_steps(3, p)


def test_z_closed_forms():
    for p in P_GRID:
        assert z_steps(1, p) == pytest.approx(1 / p, rel=4e-16)
        assert z_steps(2, p) == pytest.approx((3 - 2 * p) / (p * (2 - p)), rel=4e-16)


def test_z_against_survival_sum_grid():
    for m in range(1, 65):
        for p in P_GRID:
            assert z_steps(m, p) == pytest.approx(z_survival_sum(m, p), rel=1e-9)


@pytest.mark.parametrize("m,p", [(3, 0.3), (25, 0.01), (31, 0.2), (40, 1e-3), (64, 1e-5),
                                 (45, 1e-7), (12, 1e-9)])
def test_z_against_high_precision(m, p):
    assert z_steps(m, p) == pytest.approx(z_exact(m, p, 80), rel=1e-10)


def test_z_array_matches_scalar():
    m = np.array([1, 2, 5, 33, 40, 3])
    p = np.array([0.3, 0.5, 1e-4, 0.02, 1e-7, 1.0])
    out = z_steps_array(m, p)
    assert out.tolist() == [z_steps(int(a), float(b)) for a, b in zip(m, p)]


def test_z_monotone_and_bounded():
    ps = np.round(np.arange(0.05, 0.96, 0.05), 2)
    table = np.array([[z_steps(m, p) for p in ps] for m in range(1, 33)])
    assert np.all(np.diff(table, axis=0) >= 0)
    assert np.all(np.diff(table, axis=1) <= 0)
    assert np.all(table >= (1 / ps)[None, :] * (1 - 1e-15))


@pytest.mark.parametrize("m,p", [(1, 0.5), (2, 0.5), (8, 0.1)])
def test_z_monte_carlo(m, p):
    mean, se = z_monte_carlo_oracle(m, p, 200_000, np.random.default_rng(m))
    assert abs(mean - z_steps(m, p)) <= 3 * se


def test_rate_single_segment():
    r = mean_time_and_rate(PathResult(0, 1, "km", 1, 50.0), RepeaterParams())
    assert r.p0 == pytest.approx(0.1, rel=1e-14)
    assert r.t0_s == pytest.approx(5e-4, rel=1e-14)
    assert r.mean_time_s == pytest.approx(5e-3, rel=1e-12)
    assert r.rate_hz == pytest.approx(200.0, rel=1e-12)
    assert r.rate_hz == 1 / r.mean_time_s


def test_two_route_rates(two_routes):
    params = RepeaterParams()
    km = mean_time_and_rate(select_path(two_routes, 0, 2, "km"), params)
    hops = mean_time_and_rate(select_path(two_routes, 0, 2, "hops"), params)
    assert km.rate_hz == pytest.approx(4284, rel=1e-3)
    assert hops.rate_hz == pytest.approx(586, rel=1e-3)
    assert km.rate_hz > hops.rate_hz


def test_zero_length_path():
    with pytest.raises(DegeneratePathError):
        mean_time_and_rate(PathResult(0, 1, "km", 2, 0.0), RepeaterParams())


def test_single_edge_network():
    g = make_graph(2, [(0, 1)], [50.0], [(0, 0), (50, 0)])
    s = network_rates(g, "km", RepeaterParams())
    assert s.avg_rate_hz == pytest.approx(200.0, rel=1e-12)
    assert s.n_pairs == 1


def test_equal_complete_graph_modes_agree():
    edges = [(i, j) for i in range(5) for j in range(i + 1, 5)]
    g = make_graph(5, edges, [40.0] * len(edges))
    a = network_rates(g, "hops", RepeaterParams())
    b = network_rates(g, "km", RepeaterParams())
    assert a.avg_rate_hz == b.avg_rate_hz


def _random_connected(seed, n=9):
    rng = np.random.default_rng(seed)
    pos = rng.uniform(0, 200, (n, 2))
    edges = [(k, k + 1) for k in range(n - 1)]
    edges += [(i, j) for i in range(n) for j in range(i + 2, n) if rng.random() < 0.3]
    d = [float(np.hypot(*(pos[i] - pos[j]))) for i, j in edges]
    return make_graph(n, edges, d, pos)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_table_rates_match_per_pair(seed):
    g = _random_connected(seed)
    params = RepeaterParams()
    for mode in ("hops", "km"):
        s = rates_from_table(path_table(g, mode), params)
        expect = []
        for u, v, m, length, rate in zip(s.u, s.v, s.m, s.length_km, s.rates):
            p = select_path(g, int(u), int(v), mode)
            assert (p.m, p.length_km) == (m, pytest.approx(length, rel=1e-12))
            r = mean_time_and_rate(p, params).rate_hz
            assert rate == pytest.approx(r, rel=1e-12)
            expect.append(r)
        assert s.avg_rate_hz == pytest.approx(math.fsum(expect) / len(expect), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_mode_optimality(seed):
    g = _random_connected(seed)
    h = rates_from_table(path_table(g, "hops"), RepeaterParams())
    k = rates_from_table(path_table(g, "km"), RepeaterParams())
    assert np.all(h.m <= k.m)
    assert np.all(k.length_km <= h.length_km * (1 + 1e-12))


def test_average_is_exact_fsum():
    g = _random_connected(11, 12)
    s = network_rates(g, "km", RepeaterParams())
    assert s.avg_rate_hz == math.fsum(s.rates) / (s.n_giant * (s.n_giant - 1) / 2)


def test_rates_worker_independent():
    g = _random_connected(5, 30)
    a = network_rates(g, "km", RepeaterParams(), workers=1)
    b = network_rates(g, "km", RepeaterParams(), workers=4)
    assert a.avg_rate_hz == b.avg_rate_hz
    assert np.array_equal(a.rates, b.rates)


def test_summary_json_shape(two_routes):
    summary = network_rates(two_routes, "hops", RepeaterParams()).summary()
    assert set(summary) == {"mode", "n_giant", "avg_rate_hz", "histogram"}
    assert set(summary["histogram"]) == {"bin_lo", "bin_hi", "density"}
