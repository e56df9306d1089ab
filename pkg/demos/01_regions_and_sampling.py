"""
Regions and node placement
==========================

Nodes are dropped uniformly over a disk or over a set of weighted polygons.
Polygon weights decide how many nodes each polygon receives, which is how the
non-uniform (population-weighted) model concentrates nodes.
"""

import numpy as np

from geoqnet.region import Region, load_builtin_region, sample_nodes

# a disk whose area matches the bundled coarse Brazil outline
disk = Region.disk(1646.4)
print(f"disk area: {disk.area:.4g} km^2")

nodes = sample_nodes(disk, 1000, np.random.default_rng(0))
r = np.hypot(*nodes.positions.T)
# for a uniform disk the mean radius is 2R/3
print(f"mean radius {r.mean():.1f} km, expected {2 * 1646.4 / 3:.1f} km")
print(f"density rho = N/A = {nodes.density:.3g} per km^2")

# density-matched disks keep rho fixed while N grows
for n in (300, 1000, 2000):
    print(n, "nodes ->", f"R = {np.sqrt(Region.disk_for_density(n, 1e-5).area / np.pi):.0f} km")

# the two-cluster fixture: two heavy polygons and a light background
two = load_builtin_region("two_cluster")
print("\ntwo_cluster polygons:", len(two.polygons), "weights:", np.round(two.weights, 3))
nodes = sample_nodes(two, 2000, np.random.default_rng(1))
share = np.bincount(nodes.region_id, minlength=len(two.polygons)) / len(nodes)
print("observed shares:", np.round(share, 3))

# every node lies inside the polygon that claimed it
for k, poly in enumerate(two.polygons):
    assert poly.contains(nodes.positions[nodes.region_id == k]).all()

brazil = load_builtin_region("brazil_coarse")
print(f"\nbrazil_coarse: {len(brazil.polygons)} states, area {brazil.area:.4g} km^2")
