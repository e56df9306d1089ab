"""
Fiber topology and the photonic overlay
=======================================

Fiber edges follow the Waxman rule beta*exp(-d/aL). A fiber edge becomes a
photonic link when at least one of n_p photons survives the fiber loss.
"""

import numpy as np

from geoqnet.netgen import (
    WaxmanParams,
    build_network,
    photon_survival_prob,
    photonic_link_prob,
    waxman_edge_prob,
)
from geoqnet.region import load_builtin_region, sample_nodes

params = WaxmanParams()  # beta = 1, aL = 226 km, gamma = 0.2 dB/km, n_p = 1000
print(f"{'d km':>6} {'Waxman':>8} {'photon':>10} {'link':>8}")
for d in (0, 50, 100, 150, 200, 226, 300, 500):
    p = photon_survival_prob(d, params.gamma_db_per_km)
    print(f"{d:6d} {waxman_edge_prob(d, params):8.4f} {p:10.3g} "
          f"{photonic_link_prob(p, params.n_photons):8.4f}")

# the photonic layer falls off sharply near 150-250 km: beyond that, photons die
nodes = sample_nodes(load_builtin_region("two_cluster"), 500, np.random.default_rng(2))
fiber, photonic = build_network(nodes, params, seed=2)
print(f"\nfiber edges {fiber.n_edges}, photonic edges {photonic.n_edges}")
print(f"mean fiber length {fiber.lengths.mean():.0f} km, "
      f"mean photonic length {photonic.lengths.mean():.0f} km")

# draws are keyed per pair, so the same seed always rebuilds the same network
again = build_network(nodes, params, seed=2)[1]
print("rebuild identical:", np.array_equal(again.edges, photonic.edges))
