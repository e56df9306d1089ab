import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from geoqnet.errors import ConfigError, GeometryError
from geoqnet.region import (
    Polygon,
    Region,
    load_builtin_region,
    load_region,
    pairwise_distance,
    points_in_polygon,
    sample_nodes,
    shoelace_area,
)


def square(x0, y0, side=1.0):
    return [[x0, y0], [x0 + side, y0], [x0 + side, y0 + side], [x0, y0 + side], [x0, y0]]


def collection(*features, crs_mode="planar_km"):
    return {"type": "FeatureCollection", "crs_mode": crs_mode,
            "features": [{"type": "Feature", "properties": {"name": name, "weight": w},
                          "geometry": {"type": "Polygon", "coordinates": [ring]}}
                         for name, ring, w in features]}


def two_squares(w1, w2):
    return load_region(collection(("a", square(0, 0), w1), ("b", square(5, 0), w2)))


def test_unit_square_area():
    r = load_region(collection(("sq", square(0, 0), 1)))
    assert r.area == pytest.approx(1.0, rel=1e-9)


def test_two_squares_area_and_weights():
    r = two_squares(3, 1)
    assert r.area == pytest.approx(2.0, rel=1e-9)
    assert r.weights.tolist() == [3.0, 1.0]


def test_self_intersecting_ring_rejected():
    bowtie = [[0, 0], [1, 1], [1, 0], [0, 1], [0, 0]]
    with pytest.raises(GeometryError, match="bow"):
        load_region(collection(("bow", bowtie, 1)))


def test_malformed_feature_is_named():
    doc = collection(("fine", square(0, 0), 1))
    doc["features"].append({"type": "Feature", "properties": {"name": "broken", "weight": "x"},
                            "geometry": {"type": "Polygon", "coordinates": [square(3, 3)]}})
    with pytest.raises(GeometryError, match="broken"):
        load_region(doc)


def test_negative_weight_rejected():
    with pytest.raises(GeometryError):
        load_region(collection(("neg", square(0, 0), -1)))


def test_region_file_round_trip(tmp_path):
    path = tmp_path / "r.geojson"
    path.write_text(json.dumps(collection(("a", square(0, 0, 2), 1))))
    assert load_region(path).area == pytest.approx(4.0)
    with pytest.raises(FileNotFoundError):
        load_region(tmp_path / "missing.geojson")


def test_lonlat_projection_area():
    # one degree square at the equator is about 111.2 km on a side
    r = load_region(collection(("eq", square(0, -0.5), 1), crs_mode="lonlat"))
    side = 6371.0 * math.pi / 180
    assert r.area == pytest.approx(side * side, rel=1e-3)


def test_disk_area():
    assert Region.disk(1646.4).area == pytest.approx(math.pi * 1646.4**2, rel=1e-9)
    r = Region.disk_for_density(1000, 1e-5)
    assert 1000 / r.area == pytest.approx(1e-5, rel=1e-12)


def test_polygon_area_is_shoelace_sum():
    r = load_builtin_region("brazil_coarse")
    assert r.area == pytest.approx(math.fsum(abs(shoelace_area(p.vertices)) for p in r.polygons),
                                   rel=1e-9)


def test_builtin_two_cluster_area():
    assert load_builtin_region("two_cluster").area == pytest.approx(180_000.0, rel=1e-9)


def test_disk_mean_radius():
    nodes = sample_nodes(Region.disk(1.0), 100_000, np.random.default_rng(1))
    r = np.hypot(*nodes.positions.T)
    assert abs(r.mean() - 2 / 3) < 0.01
    assert r.max() <= 1.0


def test_zero_weight_polygon_excluded():
    nodes = sample_nodes(two_squares(1, 0), 100, np.random.default_rng(2))
    assert np.all(nodes.region_id == 0)
    assert np.all(nodes.positions[:, 0] <= 1.0)


def test_weighted_occupancy():
    nodes = sample_nodes(two_squares(3, 1), 100_000, np.random.default_rng(3))
    frac = np.mean(nodes.region_id == 0)
    assert abs(frac - 0.75) < 0.01
    counts = np.bincount(nodes.region_id, minlength=2)
    assert stats.chisquare(counts, [75_000, 25_000]).pvalue > 0.01


def test_all_zero_weights_is_config_error():
    with pytest.raises(ConfigError):
        sample_nodes(two_squares(0, 0), 10, np.random.default_rng(0))


def test_disk_angles_uniform():
    nodes = sample_nodes(Region.disk(10.0), 100_000, np.random.default_rng(4))
    theta = np.arctan2(nodes.positions[:, 1], nodes.positions[:, 0])
    counts, _ = np.histogram(theta, bins=36, range=(-np.pi, np.pi))
    assert stats.chisquare(counts).pvalue > 0.01


def test_sampling_deterministic():
    r = load_builtin_region("two_cluster")
    a = sample_nodes(r, 500, np.random.default_rng(9))
    b = sample_nodes(r, 500, np.random.default_rng(9))
    assert np.array_equal(a.positions, b.positions)
    assert np.array_equal(a.region_id, b.region_id)


@pytest.mark.parametrize("name", ["two_cluster", "brazil_coarse"])
def test_polygon_containment(name):
    r = load_builtin_region(name)
    nodes = sample_nodes(r, 5000, np.random.default_rng(5))
    for k, poly in enumerate(r.polygons):
        mine = nodes.positions[nodes.region_id == k]
        assert points_in_polygon(mine, poly.vertices).all()


def test_density_exact():
    r = Region.disk(100.0)
    nodes = sample_nodes(r, 321, np.random.default_rng(0))
    assert nodes.density == 321 / r.area


def test_points_in_polygon_concave():
    ell = np.array([[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]], dtype=float)
    pts = np.array([[0.5, 0.5], [1.5, 0.5], [0.5, 1.5], [1.5, 1.5], [3, 3]])
    assert points_in_polygon(pts, ell).tolist() == [True, True, True, False, False]


def test_polygon_needs_three_vertices():
    with pytest.raises(GeometryError):
        Polygon(np.array([[0.0, 0.0], [1.0, 0.0]]), 1.0)


def test_pairwise_distance_examples():
    assert pairwise_distance((0, 0), (3, 4)) == 5.0
    assert pairwise_distance((2.5, -1), (2.5, -1)) == 0.0


finite = st.floats(-1e4, 1e4, allow_nan=False)


@given(finite, finite, finite, finite)
def test_pairwise_distance_formula(x1, y1, x2, y2):
    d = pairwise_distance((x1, y1), (x2, y2))
    assert d == pytest.approx(math.sqrt((x2 - x1) ** 2 + (y2 - y1) ** 2), rel=1e-12, abs=1e-12)
    assert d == pairwise_distance((x2, y2), (x1, y1))
    assert (d == 0) == ((x1, y1) == (x2, y2))
