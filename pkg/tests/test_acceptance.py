"""End-to-end acceptance checks, one test per criterion.

Each test prints a single [PASS]/[FAIL] line, which is also collected into the
terminal summary. Run directly with ``python tests/test_acceptance.py``.
"""
import math
import os
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from conftest import ACCEPTANCE_LINES

from geoqnet.cli import main
from geoqnet.ensemble import RunConfig, pooled_degree_histogram, run_records, sample_network
from geoqnet.fitting import fit_gaussian, fit_poisson, fit_power_law, fit_two_gaussian
from geoqnet.metrics import bin_count_for_size, degree_histogram
from geoqnet.netgen import (
    WaxmanParams,
    build_network,
    photon_survival_prob,
    photonic_link_prob,
    waxman_edge_prob,
)
from geoqnet.region import NodeSet
from geoqnet.repeater import z_monte_carlo_oracle, z_steps, z_survival_sum
from geoqnet.verify import compare_with_brute_force, random_small_graph

P_GRID = (0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9)
BRAZIL = {"kind": "builtin", "name": "brazil_coarse"}
TWO_CLUSTER = {"kind": "builtin", "name": "two_cluster"}
WORKERS = os.cpu_count() or 1


def report(num: int, title: str, passed: bool, detail: str) -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] {num:>2}. {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert passed, line


def pair_at(d):
    return NodeSet(np.array([[0.0, 0.0], [d, 0.0]]), np.zeros(2), 1.0)


def test_01_z_against_oracles():
    start = time.perf_counter()
    worst = max(abs(z_steps(m, p) / z_survival_sum(m, p) - 1)
                for m in range(1, 65) for p in P_GRID)
    worst_sigma = 0.0
    for m in (1, 2, 4, 8, 16):
        for p in (0.1, 0.5):
            rng = np.random.default_rng(1000 * m + int(10 * p))
            mean, se = z_monte_carlo_oracle(m, p, 1_000_000, rng)
            worst_sigma = max(worst_sigma, abs(mean - z_steps(m, p)) / se)
    elapsed = time.perf_counter() - start
    report(1, "Z_m(P) vs survival sum and Monte Carlo",
           worst <= 1e-9 and worst_sigma <= 3 and elapsed < 120,
           f"max rel err {worst:.2e} (tol 1e-9), max MC deviation {worst_sigma:.2f} se (tol 3), "
           f"{elapsed:.1f} s (limit 120)")


def test_02_closed_forms():
    worst = 0.0
    for p in P_GRID:
        worst = max(worst, abs(z_steps(1, p) * p - 1),
                    abs(z_steps(2, p) / ((3 - 2 * p) / (p * (2 - p))) - 1))
    report(2, "closed forms Z_1, Z_2", worst <= 4 * np.finfo(float).eps,
           f"max rel err {worst:.2e} (tol {4 * np.finfo(float).eps:.1e})")


def test_03_waxman_frequency():
    params = WaxmanParams()
    seeds = range(10_000)
    worst = 0.0
    for d in (50.0, 226.0, 500.0):
        nodes = pair_at(d)
        hits = sum(build_network(nodes, params, s)[0].n_edges for s in seeds)
        p = waxman_edge_prob(d, params)
        sigma = math.sqrt(p * (1 - p) / len(seeds))
        worst = max(worst, abs(hits / len(seeds) - p) / sigma)
    report(3, "Waxman edge frequency at 50/226/500 km", worst <= 3,
           f"max deviation {worst:.2f} sigma (tol 3) over 1e4 seeds")


def test_04_photonic_retention():
    params = WaxmanParams()
    worst = 0.0
    for d in (50.0, 100.0, 150.0):
        nodes = pair_at(d)
        fiber = photonic = 0
        for s in range(10_000):
            f, ph = build_network(nodes, params, s)
            fiber += f.n_edges
            photonic += ph.n_edges
        q = photonic_link_prob(photon_survival_prob(d, 0.2), 1000)
        sigma = math.sqrt(max(q * (1 - q), 1e-12) / fiber)
        worst = max(worst, abs(photonic / fiber - q) / sigma)
    at100 = photonic_link_prob(photon_survival_prob(100.0, 0.2), 1000)
    report(4, "photonic retention at 50/100/150 km",
           worst <= 3 and abs(at100 - 0.99996) < 5e-6,
           f"max deviation {worst:.2f} sigma (tol 3), analytic q(100 km) = {at100:.6f}")


def test_05_uniform_degree_poisson():
    start = time.perf_counter()
    cfg = RunConfig(region={"kind": "disk", "radius_km": 1646.4}, n_values=(1000,),
                    samples=100, compute_rates=False)
    records = run_records(cfg, WORKERS)
    fit = fit_poisson(pooled_degree_histogram(records, bin_count_for_size(1000)))
    elapsed = time.perf_counter() - start
    report(5, "uniform disk degree law is Poisson", fit.p_value > 0.01 and elapsed < 300,
           f"lambda {fit.lam:.3f}, chi2 {fit.chi2:.1f} on {fit.dof} dof, p = {fit.p_value:.2e} "
           f"(need > 0.01), {elapsed:.1f} s (limit 300)")


def test_06_two_cluster_bimodal():
    # only the degree law matters here, so build each ensemble member's network
    # without the path and rate stages
    cfg = RunConfig(region=TWO_CLUSTER, n_values=(1000,), samples=100)
    bins = bin_count_for_size(1000)
    bimodal = 0
    for idx in range(cfg.samples):
        photonic = sample_network(cfg, 1000, idx)[4]
        h = degree_histogram(photonic, bins)
        one = fit_gaussian(h)
        bimodal += fit_two_gaussian(h, one).residual < 0.8 * one.residual
    report(6, "two-cluster degree histogram is bimodal", bimodal >= 0.9 * cfg.samples,
           f"{bimodal}/{cfg.samples} samples with two-Gaussian residual < 0.8x single "
           f"(need 90%)")


def test_07_path_length_scaling():
    start = time.perf_counter()
    cfg = RunConfig(region={"kind": "disk", "density_per_km2": 1e-5},
                    n_values=(300, 500, 800, 1200, 2000), samples=50, compute_rates=False)
    records = run_records(cfg, WORKERS)
    deltas = {}
    for mode in ("hops", "km"):
        pts = []
        for n in cfg.n_values:
            vals = [r.values[f"avg_l_{mode}"] for r in records
                    if r.n_nodes == n and math.isfinite(r.values[f"avg_l_{mode}"])]
            pts.append((n, float(np.mean(vals))))
        deltas[mode] = fit_power_law(pts).delta
    elapsed = time.perf_counter() - start
    ok = (abs(deltas["hops"] - 0.38) <= 0.05 and abs(deltas["km"] - 0.40) <= 0.05
          and elapsed < 1800)
    report(7, "<l> ~ N^delta at rho = 1e-5", ok,
           f"delta hops {deltas['hops']:.3f} (0.38 +/- 0.05), delta km {deltas['km']:.3f} "
           f"(0.40 +/- 0.05), {elapsed:.1f} s (limit 1800)")


def test_08_km_beats_hops():
    details, ok = [], True
    for label, region, n in (("disk rho=5e-5", {"kind": "disk", "density_per_km2": 5e-5}, 1000),
                             ("two-cluster", TWO_CLUSTER, 500)):
        cfg = RunConfig(region=region, n_values=(n,), samples=100)
        records = run_records(cfg, WORKERS)
        wins = sum(r.values["avg_rate_hz_km"] >= r.values["avg_rate_hz_hops"] for r in records)
        ok &= wins >= 0.95 * len(records)
        details.append(f"{label} N={n}: {wins}/{len(records)}")
    report(8, "km-mode rate >= hop-mode rate", ok, "; ".join(details) + " (need 95%)")


def test_09_brazil_small_paths():
    cfg = RunConfig(region=BRAZIL, n_values=(200, 500, 1000, 2000), samples=20,
                    compute_rates=False)
    records = run_records(cfg, WORKERS)
    means = {}
    for n in cfg.n_values:
        group = [r for r in records if r.n_nodes == n and r.status == "ok"]
        means[n] = (float(np.mean([r.values["avg_l_hops"] for r in group])),
                    float(np.mean([r.values["diameter_hops"] for r in group])))
    worst_l = max(v[0] for v in means.values())
    worst_d = max(v[1] for v in means.values())
    detail = ", ".join(f"N={n}: <l> {l:.2f} diam {d:.1f}" for n, (l, d) in means.items())
    report(9, "Brazil <l> <= 10 and diameter <= 40", worst_l <= 10 and worst_d <= 40, detail)


def test_10_brazil_rate_magnitude():
    cfg = RunConfig(region=BRAZIL, n_values=(500,), samples=20, modes=("km",))
    records = run_records(cfg, WORKERS)
    rates = [r.values["avg_rate_hz_km"] for r in records if r.status == "ok"]
    mean = float(np.mean(rates))
    report(10, "Brazil N=500 km-mode average rate", 2 <= mean <= 32,
           f"mean R = {mean:.2f} pairs/s over {len(rates)} samples (need [2, 32])")


def test_11_brute_force_metrics():
    rng = np.random.default_rng(20240611)
    bad = []
    for _ in range(1000):
        bad += compare_with_brute_force(random_small_graph(rng, 8))
    report(11, "metrics vs exhaustive oracles", not bad,
           f"{len(bad)} mismatches over 1000 graphs" + (f", first: {bad[0]}" if bad else ""))


def tree_bytes(root: Path) -> dict[str, bytes]:
    return {p.relative_to(root).as_posix(): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()}


def test_12_cli_determinism(tmp_path, monkeypatch):
    cfg = tmp_path / "two.json"
    cfg.write_text('{"region": {"kind": "builtin", "name": "two_cluster"}, '
                   '"n_values": [150], "samples": 3}')
    trees = []
    for workers in ("1", "2"):
        run_dir = tmp_path / f"w{workers}"
        run_dir.mkdir()
        monkeypatch.chdir(run_dir)
        codes = [
            main(["generate", "--config", str(cfg), "--out", "g", "--workers", workers]),
            main(["stats", "--graph", "g", "--out", "s", "--workers", workers]),
            main(["rates", "--graph", "g", "--out", "r", "--workers", workers]),
            main(["sweep", "--config", str(cfg), "--n", "120", "150", "--out", "sw",
                  "--workers", workers]),
        ]
        assert codes == [0, 0, 0, 0]
        trees.append(tree_bytes(run_dir))
    differ = sorted(k for k in trees[0] if trees[0][k] != trees[1].get(k))
    same_names = set(trees[0]) == set(trees[1])
    report(12, "CLI outputs independent of --workers", same_names and not differ,
           f"{len(trees[0])} files compared, {len(differ)} differ" +
           (f": {differ[:3]}" if differ else ""))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
