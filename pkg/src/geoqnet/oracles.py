"""Exhaustive reference computations for small graphs.

Plain-Python implementations that share no code with :mod:`geoqnet.metrics`;
they are only practical for a handful of nodes.
"""

from __future__ import annotations

import itertools
import math


def floyd_warshall(n, edges, weights=None):
    """All-pairs shortest distances; ``weights=None`` counts hops."""
    inf = math.inf
    d = [[0.0 if i == j else inf for j in range(n)] for i in range(n)]
    for k, (i, j) in enumerate(edges):
        w = 1.0 if weights is None else float(weights[k])
        d[i][j] = min(d[i][j], w)
        d[j][i] = min(d[j][i], w)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i][k] + d[k][j] < d[i][j]:
                    d[i][j] = d[i][k] + d[k][j]
    return d


def components(n, edges):
    """Node sets of connected components, via reachability closure."""
    reach = floyd_warshall(n, edges)
    seen, comps = set(), []
    for i in range(n):
        if i in seen:
            continue
        comp = {j for j in range(n) if reach[i][j] < math.inf}
        seen |= comp
        comps.append(comp)
    return comps


def giant(n, edges):
    """Largest component; ties go to the one with the smallest node id."""
    comps = components(n, edges)
    return sorted(comps, key=lambda c: (-len(c), min(c)))[0]


def clustering(n, edges):
    adj = {i: set() for i in range(n)}
    for i, j in edges:
        adj[i].add(j)
        adj[j].add(i)
    total = 0.0
    for i in range(n):
        k = len(adj[i])
        if k < 2:
            continue
        links = sum(1 for a, b in itertools.combinations(sorted(adj[i]), 2) if b in adj[a])
        total += 2.0 * links / (k * (k - 1))
    return total / n


def all_simple_paths(n, edges, weights, u, v):
    """Yield ``(node_sequence, total_length)`` for every simple path u -> v."""
    adj = {i: {} for i in range(n)}
    for k, (i, j) in enumerate(edges):
        adj[i][j] = float(weights[k])
        adj[j][i] = float(weights[k])
    stack = [(u, (u,), 0.0)]
    while stack:
        node, seq, length = stack.pop()
        if node == v:
            yield seq, length
            continue
        for nxt, w in adj[node].items():
            if nxt not in seq:
                stack.append((nxt, seq + (nxt,), length + w))


def best_path(n, edges, weights, u, v, mode, rtol=1e-10):
    """Optimal route by exhaustive enumeration, ties to the smallest sequence."""
    paths = list(all_simple_paths(n, edges, weights, u, v))
    if not paths:
        return None
    if mode == "hops":
        fewest = min(len(p) for p, _ in paths)
        cands = [(p, l) for p, l in paths if len(p) == fewest]
    else:
        shortest = min(l for _, l in paths)
        cands = [(p, l) for p, l in paths if l <= shortest * (1 + rtol)]
    return min(cands, key=lambda pl: pl[0])
