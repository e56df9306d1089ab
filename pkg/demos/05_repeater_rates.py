"""
Repetition rates over repeater chains
=====================================

A path of length L split into m equal segments needs Z_m(P0) rounds on
average before every segment holds entanglement. Each round lasts the
round-trip time of one segment, so the rate is 1 / (T0 * Z_m).
"""

import numpy as np

from geoqnet.netgen import Graph
from geoqnet.region import NodeSet
from geoqnet.repeater import (
    RepeaterParams,
    mean_time_and_rate,
    network_rates,
    select_path,
    z_monte_carlo_oracle,
    z_steps,
)

# Z_m(P) is the expected maximum of m geometric waits
for m in (1, 2, 8, 32):
    mc, se = z_monte_carlo_oracle(m, 0.3, 200_000, np.random.default_rng(m))
    print(f"Z_{m}(0.3) = {z_steps(m, 0.3):8.4f}   Monte Carlo {mc:8.4f} +/- {se:.4f}")

# two routes between nodes 0 and 2: two 30 km hops, or three 10 km hops
pos = np.array([(0, 0), (15, np.sqrt(675)), (30, 0), (10, 0), (20, 0)], dtype=float)
edges = np.array([[0, 1], [0, 3], [1, 2], [2, 4], [3, 4]])
lengths = np.array([30.0, 10.0, 30.0, 10.0, 10.0])
g = Graph(NodeSet(pos, np.zeros(5), 1.0), edges, lengths)

params = RepeaterParams()
for mode in ("hops", "km"):
    path = select_path(g, 0, 2, mode)
    r = mean_time_and_rate(path, params)
    print(f"{mode:>4}: route {path.nodes}, {path.length_km:.0f} km, rate {r.rate_hz:.0f} Hz")

# average over every pair of the giant cluster
for mode in ("hops", "km"):
    s = network_rates(g, mode, params)
    print(f"{mode:>4}: network average {s.avg_rate_hz:.0f} Hz over {s.n_pairs} pairs")
