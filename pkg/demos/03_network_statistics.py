"""
Network statistics on the photonic graph
========================================

Degree histogram, giant cluster, clustering and shortest paths counted in
hops or in kilometres.
"""

import numpy as np

from geoqnet.metrics import (
    bin_count_for_size,
    clustering_coefficient,
    connected_components,
    degree_histogram,
    shortest_paths_hops,
    shortest_paths_km,
)
from geoqnet.netgen import WaxmanParams, build_network
from geoqnet.region import load_builtin_region, sample_nodes

n = 800
nodes = sample_nodes(load_builtin_region("brazil_coarse"), n, np.random.default_rng(3))
_, g = build_network(nodes, WaxmanParams(), seed=3)

h = degree_histogram(g, bin_count_for_size(n))
print(f"<k> = {h.mean_degree:.2f} over {bin_count_for_size(n)} bins")

comp = connected_components(g)
print(f"giant cluster {comp.giant_size}/{n} nodes ({comp.relative_size:.1%})")
print(f"<C> = {clustering_coefficient(g):.3f}")

# path statistics are taken over pairs inside the giant cluster
hops = shortest_paths_hops(g)
km = shortest_paths_km(g)
print(f"<l> = {hops.avg_hops:.2f} hops, diameter {hops.diameter_hops} hops")
print(f"mean fewest-km distance {km.avg_distance_m / 1000:.0f} km")
