"""Fiber and photonic graph construction.

Fiber edges follow the Waxman rule ``beta * exp(-d / (alpha L))``. A fiber
edge becomes a photonic link when at least one of ``n_photons`` photons
survives the fiber loss ``10 ** (-gamma d / 10)``.

Every Bernoulli draw uses a uniform variate derived from a hash of
``(seed, i, j, layer)``, so a pair's outcome does not depend on how many other
pairs exist or on the order in which pairs are visited.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .region import NodeSet, pairwise_distance

LAYERS = {"fiber": 0x46494245, "photonic": 0x50484F54}

_ROW_BLOCK = 256


@dataclass(frozen=True)
class WaxmanParams:
    """Fiber topology and loss parameters.

    ``char_length_km`` is the product alpha*L used directly in the exponent.
    When ``alpha`` is given instead, the characteristic length is recomputed
    per node set as ``alpha * max pairwise distance``.
    """

    beta: float = 1.0
    char_length_km: float = 226.0
    gamma_db_per_km: float = 0.2
    n_photons: int = 1000
    alpha: float | None = None

    def __post_init__(self):
        if not (0 < self.beta <= 1):
            raise ConfigError(f"beta must lie in (0, 1], got {self.beta}")
        if not self.char_length_km > 0:
            raise ConfigError(f"char_length_km must be > 0, got {self.char_length_km}")
        if not self.gamma_db_per_km > 0:
            raise ConfigError(f"gamma_db_per_km must be > 0, got {self.gamma_db_per_km}")
        if isinstance(self.n_photons, bool) or int(self.n_photons) != self.n_photons \
                or self.n_photons < 1:
            raise ConfigError(f"n_photons must be a positive integer, got {self.n_photons}")
        if self.alpha is not None and not self.alpha > 0:
            raise ConfigError(f"alpha must be > 0, got {self.alpha}")

    def resolved_length(self, nodes: NodeSet) -> float:
        if self.alpha is None:
            return self.char_length_km
        pos = nodes.positions
        longest = max((float(np.max(np.hypot(*(pos - p).T))) for p in pos), default=0.0)
        if longest <= 0:
            raise ConfigError("alpha mode needs at least two distinct node positions")
        return self.alpha * longest


@dataclass(frozen=True)
class Graph:
    """Undirected graph on a node set; ``edges`` rows are ``(i, j)`` with ``i < j``."""

    nodes: NodeSet
    edges: np.ndarray
    lengths: np.ndarray
    layer: str = "fiber"

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        d = np.asarray(self.lengths, dtype=float).reshape(-1)
        if len(e) != len(d):
            raise ValueError("edges and lengths differ in length")
        e.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "lengths", d)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n_nodes)

    def adjacency(self):
        """Symmetric CSR matrix of edge lengths."""
        from scipy.sparse import csr_matrix

        n = self.n_nodes
        i, j = self.edges[:, 0], self.edges[:, 1]
        return csr_matrix((np.concatenate([self.lengths, self.lengths]),
                           (np.concatenate([i, j]), np.concatenate([j, i]))), shape=(n, n))

    def neighbors(self) -> list[np.ndarray]:
        """Sorted neighbour index arrays, one per node."""
        a = self.adjacency()
        return [np.sort(a.indices[a.indptr[k]:a.indptr[k + 1]]) for k in range(self.n_nodes)]

    def subgraph_edges(self, keep: np.ndarray, layer: str) -> "Graph":
        return Graph(self.nodes, self.edges[keep], self.lengths[keep], layer)


# --- keyed randomness ----------------------------------------------------------


def _splitmix64(x: np.ndarray) -> np.ndarray:
    x = x + np.uint64(0x9E3779B97F4A7C15)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def pair_uniforms(seed: int, i: np.ndarray, j: np.ndarray, layer: str) -> np.ndarray:
    """Uniform [0, 1) variates keyed by ``(seed, min(i,j), max(i,j), layer)``."""
    lo = np.minimum(i, j).astype(np.uint64)
    hi = np.maximum(i, j).astype(np.uint64)
    key = _splitmix64(np.full(1, np.uint64(seed & 0xFFFFFFFFFFFFFFFF))
                      ^ np.uint64(LAYERS[layer]))
    x = _splitmix64(key ^ _splitmix64((lo << np.uint64(32)) | hi))
    return (x >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


# --- probabilities -------------------------------------------------------------


def waxman_edge_prob(d, params: WaxmanParams, char_length_km: float | None = None):
    """Probability that two nodes ``d`` km apart share a fiber."""
    length = params.char_length_km if char_length_km is None else char_length_km
    return params.beta * np.exp(-np.asarray(d, dtype=float) / length)


def photon_survival_prob(d, gamma: float):
    """Probability that one photon crosses ``d`` km of fiber with loss ``gamma`` dB/km."""
    return 10.0 ** (-gamma * np.asarray(d, dtype=float) / 10.0)


def photonic_link_prob(p, n_photons: int):
    """Probability that at least one of ``n_photons`` independent photons gets through."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore"):
        return -np.expm1(n_photons * np.log1p(-p))


# --- construction --------------------------------------------------------------


def build_fiber_graph(nodes: NodeSet, params: WaxmanParams, seed: int) -> Graph:
    """Draw Waxman fiber edges independently for every unordered node pair."""
    n = len(nodes)
    if n < 2:
        raise ConfigError("a fiber graph needs at least two nodes")
    length = params.resolved_length(nodes)
    pos = nodes.positions
    edge_blocks, len_blocks = [], []
    for start in range(0, n - 1, _ROW_BLOCK):
        rows = np.arange(start, min(start + _ROW_BLOCK, n - 1))
        # all pairs (i, j) with i in rows, j > i
        counts = n - 1 - rows
        i = np.repeat(rows, counts)
        j = np.arange(len(i)) - np.repeat(np.cumsum(counts) - counts, counts) + i + 1
        d = np.hypot(pos[j, 0] - pos[i, 0], pos[j, 1] - pos[i, 1])
        keep = pair_uniforms(seed, i, j, "fiber") < waxman_edge_prob(d, params, length)
        edge_blocks.append(np.column_stack([i[keep], j[keep]]))
        len_blocks.append(d[keep])
    return Graph(nodes, np.vstack(edge_blocks), np.concatenate(len_blocks), "fiber")


def build_photonic_graph(fiber: Graph, params: WaxmanParams, seed: int) -> Graph:
    """Keep each fiber edge with its photonic link probability."""
    if fiber.n_edges == 0:
        return fiber.subgraph_edges(np.zeros(0, dtype=bool), "photonic")
    p = photonic_link_prob(photon_survival_prob(fiber.lengths, params.gamma_db_per_km),
                           params.n_photons)
    u = pair_uniforms(seed, fiber.edges[:, 0], fiber.edges[:, 1], "photonic")
    return fiber.subgraph_edges(u < p, "photonic")


def build_network(nodes: NodeSet, params: WaxmanParams, seed: int) -> tuple[Graph, Graph]:
    fiber = build_fiber_graph(nodes, params, seed)
    return fiber, build_photonic_graph(fiber, params, seed)


# --- CSV exchange --------------------------------------------------------------


def write_nodes_csv(path: str | Path, nodes: NodeSet) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "x_km", "y_km", "region_id"])
        for k, ((x, y), rid) in enumerate(zip(nodes.positions, nodes.region_id)):
            w.writerow([k, repr(float(x)), repr(float(y)), int(rid)])


def write_edges_csv(path: str | Path, *graphs: Graph) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "d_km", "layer"])
        for g in graphs:
            for (i, j), d in zip(g.edges, g.lengths):
                w.writerow([int(i), int(j), repr(float(d)), g.layer])


def read_nodes_csv(path: str | Path, area: float) -> NodeSet:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    rows.sort(key=lambda r: int(r["id"]))
    if [int(r["id"]) for r in rows] != list(range(len(rows))):
        raise ValueError(f"{path}: node ids must be 0..N-1")
    pos = np.array([[float(r["x_km"]), float(r["y_km"])] for r in rows]).reshape(-1, 2)
    rid = np.array([int(r["region_id"]) for r in rows], dtype=np.int64)
    return NodeSet(pos, rid, area)


def read_edges_csv(path: str | Path, nodes: NodeSet) -> dict[str, Graph]:
    """Read an edge list back into one :class:`Graph` per layer."""
    by_layer: dict[str, tuple[list, list]] = {"fiber": ([], []), "photonic": ([], [])}
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            layer = r["layer"]
            if layer not in by_layer:
                raise ValueError(f"{path}: unknown layer {layer!r}")
            i, j = int(r["i"]), int(r["j"])
            by_layer[layer][0].append((min(i, j), max(i, j)))
            by_layer[layer][1].append(float(r["d_km"]))
    return {layer: Graph(nodes, np.array(e, dtype=np.int64).reshape(-1, 2), np.array(d), layer)
            for layer, (e, d) in by_layer.items()}


def check_graph(g: Graph, atol: float = 1e-9) -> None:
    """Raise ``ValueError`` if ``g`` has self-loops, duplicates or stale lengths."""
    e = g.edges
    if np.any(e[:, 0] >= e[:, 1]):
        raise ValueError("edge rows must satisfy i < j (no self-loops)")
    if len(np.unique(e, axis=0)) != len(e):
        raise ValueError("duplicate edges")
    pos = g.nodes.positions
    for (i, j), d in zip(e, g.lengths):
        if not math.isclose(pairwise_distance(pos[i], pos[j]), d, rel_tol=0, abs_tol=atol):
            raise ValueError(f"edge ({i}, {j}) length does not match node positions")
