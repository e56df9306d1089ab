"""Self-checks that compare the library against independent oracles."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import oracles
from .metrics import clustering_coefficient, connected_components, path_table
from .netgen import Graph, WaxmanParams, photon_survival_prob, photonic_link_prob, waxman_edge_prob
from .region import NodeSet
from .repeater import z_monte_carlo_oracle, z_steps, z_survival_sum

P_GRID = (0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9)


@dataclass(frozen=True)
class Check:
    name: str
    observed: float
    expected: float
    tolerance: str
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.name}: observed={self.observed!r} "
                f"expected={self.expected!r} tol={self.tolerance}")


def random_small_graph(rng: np.random.Generator, n_max: int = 8) -> Graph:
    """Random graph on at most ``n_max`` nodes with Euclidean edge lengths."""
    n = int(rng.integers(2, n_max + 1))
    pos = rng.uniform(0, 100, size=(n, 2))
    pairs = np.array(list(itertools.combinations(range(n), 2)))
    keep = rng.random(len(pairs)) < rng.uniform(0.2, 0.9)
    e = pairs[keep].reshape(-1, 2)
    d = np.hypot(*(pos[e[:, 1]] - pos[e[:, 0]]).T) if len(e) else np.zeros(0)
    return Graph(NodeSet(pos, np.zeros(n), 1e4), e, d, "photonic")


def compare_with_brute_force(g: Graph) -> list[str]:
    """Mismatches between library metrics and exhaustive oracles (empty if none)."""
    n = g.n_nodes
    edges = [tuple(map(int, e)) for e in g.edges]
    w = list(map(float, g.lengths))
    problems = []
    if not math.isclose(clustering_coefficient(g), oracles.clustering(n, edges),
                        rel_tol=1e-12, abs_tol=1e-15):
        problems.append("clustering")
    comp = connected_components(g)
    big = oracles.giant(n, edges)
    if set(comp.giant_members.tolist()) != big:
        problems.append("giant component")
    if len(big) < 2:
        return problems
    members = sorted(big)
    hop_d = oracles.floyd_warshall(n, edges)
    km_d = oracles.floyd_warshall(n, edges, w)
    pairs = list(itertools.combinations(members, 2))
    avg_l = sum(hop_d[a][b] for a, b in pairs) / len(pairs)
    diameter = max(hop_d[a][b] for a, b in pairs)
    for mode in ("hops", "km"):
        table = path_table(g, mode)
        for a, b in pairs:
            ia, ib = members.index(a), members.index(b)
            seq, length = oracles.best_path(n, edges, w, a, b, mode)
            if table.hops[ia, ib] != len(seq) - 1:
                problems.append(f"{mode} hop count {a}-{b}")
            if not math.isclose(table.km[ia, ib], length, rel_tol=1e-12):
                problems.append(f"{mode} route length {a}-{b}")
            if mode == "km" and not math.isclose(table.km[ia, ib], km_d[a][b], rel_tol=1e-9):
                problems.append(f"km shortest distance {a}-{b}")
        if mode == "hops":
            up = table.upper(table.hops)
            if not math.isclose(up.sum() / len(up), avg_l, rel_tol=1e-12):
                problems.append("average shortest path")
            if table.hops.max() != diameter:
                problems.append("diameter")
    return problems


def run_checks(mc_trials: int = 200_000, n_graphs: int = 200, seed: int = 7) -> list[Check]:
    checks = []
    worst = 0.0
    for m in range(1, 65):
        for p in P_GRID:
            a, b = z_steps(m, p), z_survival_sum(m, p)
            worst = max(worst, abs(a - b) / b)
    checks.append(Check("Z_m(P) vs survival sum, m=1..64", worst, 0.0, "rel <= 1e-9",
                        worst <= 1e-9))

    z2 = z_steps(2, 0.5)
    checks.append(Check("Z_2(0.5) inclusion-exclusion", z2, 8 / 3, "rel <= 1e-12",
                        math.isclose(z2, 8 / 3, rel_tol=1e-12)))
    s2 = z_survival_sum(2, 0.5)
    checks.append(Check("Z_2(0.5) survival sum", s2, 8 / 3, "rel <= 1e-12",
                        math.isclose(s2, 8 / 3, rel_tol=1e-12)))
    closed = max(max(abs(z_steps(1, p) - 1 / p) * p,
                     abs(z_steps(2, p) - (3 - 2 * p) / (p * (2 - p))) / z_steps(2, p))
                 for p in P_GRID)
    checks.append(Check("closed forms m=1,2", closed, 0.0, "rel <= 1e-14", closed <= 1e-14))

    rng = np.random.default_rng(seed)
    for m, p in ((1, 0.5), (2, 0.5), (8, 0.1)):
        mean, se = map(float, z_monte_carlo_oracle(m, p, mc_trials, rng))
        z = z_steps(m, p)
        checks.append(Check(f"Z_{m}({p}) vs Monte Carlo", mean, z, f"3 stderr = {3 * se:.4g}",
                            abs(mean - z) <= 3 * se))

    params = WaxmanParams()
    for name, got, want in (
        ("Waxman probability at d=alphaL", float(waxman_edge_prob(226.0, params)), math.exp(-1)),
        ("photon survival at 100 km", float(photon_survival_prob(100.0, 0.2)), 0.01),
        ("photonic link at 100 km", float(photonic_link_prob(0.01, 1000)), 1 - 0.99 ** 1000),
    ):
        checks.append(Check(name, got, want, "rel <= 1e-12", math.isclose(got, want, rel_tol=1e-12)))

    graph_rng = np.random.default_rng(seed + 1)
    bad = 0
    for _ in range(n_graphs):
        if compare_with_brute_force(random_small_graph(graph_rng)):
            bad += 1
    checks.append(Check(f"graph metrics vs brute force ({n_graphs} graphs, <= 8 nodes)",
                        bad, 0, "exact", bad == 0))
    return checks
