"""Network statistics on photonic graphs.

Path statistics are restricted to the giant cluster. All-pairs routes are
resolved deterministically: among the optimal paths between ``u`` and ``v``
(fewest hops, or shortest total km) the one with the lexicographically
smallest node sequence is chosen.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csgraph

from .errors import UndefinedStatisticError
from .netgen import Graph

MODES = ("hops", "km")

# relative slack when comparing floating path lengths for km-optimality
KM_RTOL = 1e-10
# the n x n frontier BFS pays off on small, high-degree giant clusters; sparse
# or large ones go to the csgraph solver
DENSE_BFS_MAX = 4000
DENSE_BFS_MIN_DEGREE = 64


def bin_count_for_size(n_nodes: int) -> int:
    """Linear histogram bin count, 16 bins at N=200 up to 28 at N=2000."""
    return int(min(28, max(16, round(16 + 12 * (n_nodes - 200) / 1800))))


@dataclass(frozen=True)
class DegreeHistogram:
    """Raw degree counts plus a linearly binned probability density."""

    counts: dict[int, int]
    bin_edges: np.ndarray
    density: np.ndarray
    mean_degree: float
    n_nodes: int

    @classmethod
    def from_degrees(cls, degrees, num_bins: int) -> "DegreeHistogram":
        if num_bins < 1:
            raise ValueError("num_bins must be >= 1")
        k = np.asarray(degrees, dtype=np.int64).ravel()
        if k.size == 0:
            raise ValueError("no degrees given")
        values, freq = np.unique(k, return_counts=True)
        lo, hi = float(k.min()) - 0.5, float(k.max()) + 0.5
        edges = np.linspace(lo, hi, num_bins + 1)
        binned, _ = np.histogram(k, bins=edges)
        density = binned / (k.size * np.diff(edges))
        return cls(counts={int(v): int(c) for v, c in zip(values, freq)},
                   bin_edges=edges, density=density,
                   mean_degree=float(k.sum()) / k.size, n_nodes=int(k.size))

    @property
    def pmf(self) -> dict[int, float]:
        return {k: c / self.n_nodes for k, c in self.counts.items()}

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    def degree_array(self) -> np.ndarray:
        return np.repeat(np.fromiter(self.counts, dtype=np.int64),
                         np.fromiter(self.counts.values(), dtype=np.int64))


def degree_histogram(g: Graph, num_bins: int) -> DegreeHistogram:
    return DegreeHistogram.from_degrees(g.degrees(), num_bins)


@dataclass(frozen=True)
class ComponentSummary:
    """Component labels ordered by smallest member id; label 0 holds node 0."""

    labels: np.ndarray
    giant_label: int
    giant_size: int
    n_nodes: int

    @property
    def relative_size(self) -> float:
        return self.giant_size / self.n_nodes

    @property
    def giant_members(self) -> np.ndarray:
        return np.flatnonzero(self.labels == self.giant_label)


def connected_components(g: Graph) -> ComponentSummary:
    n = g.n_nodes
    if n < 1:
        raise ValueError("empty graph")
    _, raw = csgraph.connected_components(g.adjacency(), directed=False)
    # canonical labels: order components by their smallest node id
    first_seen = {}
    for node, lab in enumerate(raw):
        first_seen.setdefault(int(lab), len(first_seen))
    labels = np.array([first_seen[int(lab)] for lab in raw], dtype=np.int64)
    sizes = np.bincount(labels)
    giant = int(np.argmax(sizes))  # argmax returns the first, i.e. smallest min id
    return ComponentSummary(labels, giant, int(sizes[giant]), n)


def clustering_coefficient(g: Graph) -> float:
    """Average local clustering over all nodes; degree < 2 contributes 0."""
    n = g.n_nodes
    if g.n_edges == 0:
        return 0.0
    a = g.adjacency()
    a.data[:] = 1.0
    triangles = np.asarray((a @ a).multiply(a).sum(axis=1)).ravel() / 2.0
    k = g.degrees().astype(float)
    local = np.zeros(n)
    ok = k >= 2
    local[ok] = 2.0 * triangles[ok] / (k[ok] * (k[ok] - 1.0))
    return float(local.sum() / n)


# --- all-pairs routes -----------------------------------------------------------


@dataclass(frozen=True)
class PathTable:
    """Chosen routes between all ordered pairs of giant-cluster nodes.

    ``members`` maps local index to node id. ``hops[a, b]`` and ``km[a, b]``
    describe the route from ``members[a]`` to ``members[b]``; ``next_hop`` is
    the local index of the first step.
    """

    mode: str
    members: np.ndarray
    hops: np.ndarray
    km: np.ndarray
    next_hop: np.ndarray

    @property
    def n(self) -> int:
        return len(self.members)

    def upper(self, matrix: np.ndarray) -> np.ndarray:
        """Entries for pairs ``a < b`` in row-major order."""
        return matrix[np.triu_indices(self.n, k=1)]


def _giant_subgraph(g: Graph):
    comp = connected_components(g)
    members = comp.giant_members
    local = np.full(g.n_nodes, -1, dtype=np.int64)
    local[members] = np.arange(len(members))
    keep = (local[g.edges[:, 0]] >= 0) & (local[g.edges[:, 1]] >= 0)
    e = local[g.edges[keep]]
    return comp, members, e, g.lengths[keep]


def _hop_distances(adj) -> np.ndarray:
    """All-pairs hop counts by a level-synchronous BFS from every source at once."""
    n = adj.shape[0]
    if n > DENSE_BFS_MAX or adj.nnz < DENSE_BFS_MIN_DEGREE * n:
        return csgraph.shortest_path(adj, method="D", directed=True, unweighted=True)
    a = (adj.toarray() != 0).astype(np.float32)
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    seen = np.eye(n, dtype=bool)
    frontier = np.eye(n, dtype=np.float32)
    level = 0
    while True:
        # 0/1 products sum to at most n, exact in float32 for n < 2**24
        reached = (frontier @ a > 0) & ~seen
        if not reached.any():
            return dist
        level += 1
        dist[reached] = level
        seen |= reached
        frontier = reached.astype(np.float32)


def path_table(g: Graph, mode: str, workers: int = 1) -> PathTable:
    """Resolve optimal routes between every pair of giant-cluster nodes."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    _, members, e, w = _giant_subgraph(g)
    n = len(members)
    if n < 2:
        raise UndefinedStatisticError("giant cluster has a single node")
    if mode == "km" and np.any(w <= 0):
        raise ValueError("km routing requires strictly positive edge lengths")

    from scipy.sparse import csr_matrix

    adj = csr_matrix((np.concatenate([w, w]),
                      (np.concatenate([e[:, 0], e[:, 1]]), np.concatenate([e[:, 1], e[:, 0]]))),
                     shape=(n, n))
    adj.sort_indices()
    # adj holds both directions, so the directed solvers see the undirected graph
    if mode == "hops":
        dist = _hop_distances(adj)
    else:
        dist = csgraph.shortest_path(adj, method="D", directed=True)
    weight = adj.toarray()
    indptr, indices = adj.indptr, adj.indices

    next_hop = np.empty((n, n), dtype=np.int64)

    def fill(rows):
        for s in rows:
            nb = indices[indptr[s]:indptr[s + 1]]
            if mode == "hops":
                ok = dist[nb, :] == dist[s, :] - 1.0
                pick = ok.argmax(axis=0)
            else:
                via = weight[s, nb][:, None] + dist[nb, :]
                ok = np.abs(via - dist[s, :]) <= KM_RTOL * dist[s, :]
                pick = np.where(ok.any(axis=0), ok.argmax(axis=0), via.argmin(axis=0))
            # nb is sorted, so the first admissible neighbour is the smallest id
            next_hop[s] = nb[pick]
            next_hop[s, s] = s

    chunks = np.array_split(np.arange(n), max(1, min(workers, n)))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(fill, chunks))
    else:
        fill(np.arange(n))

    cols = np.arange(n)[None, :]
    rows = np.arange(n)[:, None]
    nxt = next_hop.copy()
    hops = (rows != cols).astype(np.int64)
    km = weight[rows, nxt]
    # pointer doubling: after k rounds every entry has advanced 2**k steps
    for _ in range(max(1, math.ceil(math.log2(n))) + 1):
        if np.array_equal(nxt, np.broadcast_to(cols, nxt.shape)):
            break
        hops = hops + hops[nxt, cols]
        km = km + km[nxt, cols]
        nxt = nxt[nxt, cols]
    else:
        if not np.array_equal(nxt, np.broadcast_to(cols, nxt.shape)):
            raise RuntimeError("route resolution did not converge")
    return PathTable(mode, members, hops, km, next_hop)


@dataclass(frozen=True)
class PathStats:
    """Giant-cluster path statistics for one routing mode."""

    mode: str
    n_giant: int
    avg_hops: float
    avg_distance_m: float
    diameter_hops: int
    diameter_km: float
    pair_hops: np.ndarray
    pair_km: np.ndarray

    def hop_histogram(self):
        return histogram(self.pair_hops, np.arange(0.5, self.diameter_hops + 1.5))

    def km_histogram(self, bins: int = 30):
        return histogram(self.pair_km, bins)


def _path_stats(table: PathTable) -> PathStats:
    hops = table.upper(table.hops)
    km = table.upper(table.km)
    return PathStats(
        mode=table.mode,
        n_giant=table.n,
        avg_hops=float(hops.sum()) / len(hops),
        avg_distance_m=1000.0 * float(km.sum()) / len(km),
        diameter_hops=int(table.hops.max()),
        diameter_km=float(table.km.max()),
        pair_hops=hops,
        pair_km=km,
    )


def shortest_paths_hops(g: Graph) -> PathStats:
    """Fewest-hop routes; ``avg_hops`` is the average shortest path length."""
    return _path_stats(path_table(g, "hops"))


def shortest_paths_km(g: Graph) -> PathStats:
    """Shortest-length routes (Dijkstra); ``avg_distance_m`` is in metres."""
    return _path_stats(path_table(g, "km"))


def histogram(values, bins) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Density histogram as ``(bin_lo, bin_hi, density)`` arrays."""
    dens, edges = np.histogram(np.asarray(values, dtype=float), bins=bins, density=True)
    return edges[:-1], edges[1:], dens
