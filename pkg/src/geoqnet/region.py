"""Sampling geographies and node placement.

A :class:`Region` is either a disk of radius ``R`` or a collection of weighted
polygons in planar kilometre coordinates. Nodes are drawn from a region with
:func:`sample_nodes`; polygon regions pick an owning polygon per node with
probability proportional to its weight and then place the node uniformly
inside it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import ConfigError, GeometryError

EARTH_RADIUS_KM = 6371.0

BUILTIN_REGIONS = ("two_cluster", "brazil_coarse")


def shoelace_area(vertices: np.ndarray) -> float:
    """Signed area of a closed ring (positive for counter-clockwise order)."""
    x = vertices[:, 0]
    y = vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return 0 if v == 0 else (1 if v > 0 else -1)

    def on_segment(a, b, c):
        return (min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= c[1] <= max(a[1], b[1]))

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    if o1 != o2 and o3 != o4:
        return True
    return ((o1 == 0 and on_segment(p1, p2, q1))
            or (o2 == 0 and on_segment(p1, p2, q2))
            or (o3 == 0 and on_segment(q1, q2, p1))
            or (o4 == 0 and on_segment(q1, q2, p2)))


def is_simple_ring(vertices: np.ndarray) -> bool:
    """True when no two non-adjacent edges of the ring touch or cross."""
    pts = [tuple(p) for p in vertices]
    k = len(pts)
    if len(set(pts)) != k:
        return False
    for a in range(k):
        p1, p2 = pts[a], pts[(a + 1) % k]
        for b in range(a + 1, k):
            # adjacent edges share a vertex by construction
            if b == a + 1 or (a == 0 and b == k - 1):
                continue
            if _segments_cross(p1, p2, pts[b], pts[(b + 1) % k]):
                return False
    return True


def points_in_polygon(points: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """Even-odd ray casting test for an ``(n, 2)`` array of points."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    px = points[:, 0][:, None]
    py = points[:, 1][:, None]
    x1 = vertices[:, 0][None, :]
    y1 = vertices[:, 1][None, :]
    x2 = np.roll(vertices[:, 0], -1)[None, :]
    y2 = np.roll(vertices[:, 1], -1)[None, :]
    straddles = (y1 > py) != (y2 > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
    crossings = straddles & (px < x_cross)
    return (np.count_nonzero(crossings, axis=1) % 2) == 1


@dataclass(frozen=True)
class Polygon:
    """A simple polygon with a non-negative sampling weight."""

    vertices: np.ndarray
    weight: float
    name: str = ""
    area: float = field(init=False)

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 2:
            raise GeometryError(f"polygon {self.name!r}: vertices must be (k, 2)")
        if len(verts) >= 2 and np.array_equal(verts[0], verts[-1]):
            verts = verts[:-1]
        if len(verts) < 3:
            raise GeometryError(f"polygon {self.name!r}: needs at least 3 vertices")
        if not np.all(np.isfinite(verts)):
            raise GeometryError(f"polygon {self.name!r}: non-finite coordinate")
        if not math.isfinite(self.weight) or self.weight < 0:
            raise GeometryError(f"polygon {self.name!r}: weight must be finite and >= 0")
        if not is_simple_ring(verts):
            raise GeometryError(f"polygon {self.name!r}: ring is self-intersecting")
        area = abs(shoelace_area(verts))
        if area <= 0:
            raise GeometryError(f"polygon {self.name!r}: zero area")
        verts.setflags(write=False)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "weight", float(self.weight))
        object.__setattr__(self, "area", area)

    def contains(self, points: np.ndarray) -> np.ndarray:
        return points_in_polygon(points, self.vertices)

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])


@dataclass(frozen=True)
class Region:
    """A disk or a set of weighted polygons, in planar km."""

    kind: str
    radius: float | None = None
    polygons: tuple[Polygon, ...] = ()
    name: str = ""

    def __post_init__(self):
        if self.kind == "disk":
            if self.radius is None or not self.radius > 0 or not math.isfinite(self.radius):
                raise ConfigError("disk region needs a finite radius > 0")
        elif self.kind == "polygons":
            if not self.polygons:
                raise ConfigError("polygon region needs at least one polygon")
            object.__setattr__(self, "polygons", tuple(self.polygons))
        else:
            raise ConfigError(f"unknown region kind {self.kind!r}")

    @classmethod
    def disk(cls, radius_km: float) -> "Region":
        return cls(kind="disk", radius=float(radius_km), name="disk")

    @classmethod
    def disk_for_density(cls, n_nodes: int, density: float) -> "Region":
        """Disk whose area makes ``n_nodes / area == density``."""
        if not density > 0:
            raise ConfigError("density must be > 0")
        return cls.disk(math.sqrt(n_nodes / (math.pi * density)))

    @property
    def area(self) -> float:
        if self.kind == "disk":
            return math.pi * self.radius ** 2
        return math.fsum(p.area for p in self.polygons)

    @property
    def weights(self) -> np.ndarray:
        return np.array([p.weight for p in self.polygons])


@dataclass(frozen=True)
class NodeSet:
    """Planar node positions with the polygon index that owns each node."""

    positions: np.ndarray
    region_id: np.ndarray
    area: float

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float).reshape(-1, 2)
        rid = np.asarray(self.region_id, dtype=np.int64).reshape(-1)
        if len(rid) != len(pos):
            raise ValueError("positions and region_id lengths differ")
        pos.setflags(write=False)
        rid.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "region_id", rid)

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def density(self) -> float:
        return len(self) / self.area


def pairwise_distance(a, b) -> float:
    """Euclidean distance between two planar points, in km."""
    return math.hypot(float(b[0]) - float(a[0]), float(b[1]) - float(a[1]))


def distance_matrix(positions: np.ndarray) -> np.ndarray:
    diff = positions[:, None, :] - positions[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])


def _sample_disk(radius, n, rng):
    r = radius * np.sqrt(rng.random(n))
    theta = 2.0 * np.pi * rng.random(n)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def _sample_polygon(poly: Polygon, n: int, rng: np.random.Generator) -> np.ndarray:
    x0, y0, x1, y1 = poly.bbox
    accept_rate = poly.area / ((x1 - x0) * (y1 - y0))
    out = np.empty((0, 2))
    while len(out) < n:
        need = n - len(out)
        batch = int(need / accept_rate * 1.2) + 8
        cand = np.column_stack([rng.uniform(x0, x1, batch), rng.uniform(y0, y1, batch)])
        out = np.vstack([out, cand[poly.contains(cand)]])
    return out[:n]


def sample_nodes(region: Region, n: int, rng: np.random.Generator) -> NodeSet:
    """Place ``n`` nodes in ``region`` using the random stream ``rng``.

    Polygon membership is drawn i.i.d. with probability proportional to the
    polygon weights; the position inside the chosen polygon is uniform
    (rejection sampling on the polygon's bounding box).
    """
    if n < 1:
        raise ConfigError("need at least one node")
    if region.kind == "disk":
        return NodeSet(_sample_disk(region.radius, n, rng), np.zeros(n, dtype=np.int64),
                       region.area)

    weights = region.weights
    total = weights.sum()
    if not total > 0:
        raise ConfigError("all polygon weights are zero")
    owner = rng.choice(len(weights), size=n, p=weights / total)
    positions = np.empty((n, 2))
    for idx in np.unique(owner):
        slots = np.flatnonzero(owner == idx)
        positions[slots] = _sample_polygon(region.polygons[idx], len(slots), rng)
    return NodeSet(positions, owner, region.area)


# --- loading -----------------------------------------------------------------


def project_equirectangular(lonlat: np.ndarray, lon0: float, lat0: float) -> np.ndarray:
    """Project degrees to planar km about ``(lon0, lat0)``."""
    lon = np.radians(lonlat[:, 0] - lon0)
    lat = np.radians(lonlat[:, 1] - lat0)
    return np.column_stack([EARTH_RADIUS_KM * math.cos(math.radians(lat0)) * lon,
                            EARTH_RADIUS_KM * lat])


def _ring_centroid(ring: np.ndarray) -> tuple[float, float, float]:
    x, y = ring[:, 0], ring[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = cross.sum() / 2.0
    cx = ((x + xn) * cross).sum() / (6.0 * a)
    cy = ((y + yn) * cross).sum() / (6.0 * a)
    return abs(a), cx, cy


def load_region(source: str | Path | Mapping[str, Any]) -> Region:
    """Build a polygon :class:`Region` from a FeatureCollection.

    ``source`` is a path to a JSON file or an already parsed mapping. Each
    feature needs a ``Polygon`` geometry and a numeric ``weight`` property.
    A top-level ``crs_mode`` of ``"lonlat"`` (degrees) or ``"planar_km"``
    selects the coordinate interpretation; lon/lat input is projected once,
    equirectangularly about the area-weighted centroid of all rings.
    """
    if isinstance(source, Mapping):
        doc = source
        label = "<mapping>"
    else:
        path = Path(source)
        label = str(path)
        try:
            doc = json.loads(path.read_text())
        except FileNotFoundError:
            raise
        except (OSError, json.JSONDecodeError) as exc:
            raise GeometryError(f"{label}: cannot parse region file: {exc}") from exc

    if doc.get("type") != "FeatureCollection" or not isinstance(doc.get("features"), list):
        raise GeometryError(f"{label}: expected a FeatureCollection with a features list")
    crs_mode = doc.get("crs_mode", "planar_km")
    if crs_mode not in ("lonlat", "planar_km"):
        raise GeometryError(f"{label}: crs_mode must be 'lonlat' or 'planar_km'")

    rings, weights, names = [], [], []
    for k, feat in enumerate(doc["features"]):
        props = feat.get("properties") or {}
        fname = str(props.get("name", f"feature[{k}]"))
        geom = feat.get("geometry") or {}
        try:
            if geom.get("type") != "Polygon":
                raise ValueError("geometry type must be Polygon")
            coords = geom["coordinates"]
            if len(coords) != 1:
                raise ValueError("polygons with holes are not supported")
            ring = np.asarray(coords[0], dtype=float)
            if ring.ndim != 2 or ring.shape[1] != 2:
                raise ValueError("ring must be a list of [x, y] pairs")
            weight = props["weight"]
            if isinstance(weight, bool) or not isinstance(weight, (int, float)):
                raise ValueError("weight must be numeric")
        except (KeyError, TypeError, ValueError) as exc:
            raise GeometryError(f"{label}: feature {fname!r}: {exc}") from exc
        if len(ring) >= 2 and np.array_equal(ring[0], ring[-1]):
            ring = ring[:-1]
        rings.append(ring)
        weights.append(float(weight))
        names.append(fname)

    if not rings:
        raise GeometryError(f"{label}: no features")

    if crs_mode == "lonlat":
        parts = [_ring_centroid(r) for r in rings if len(r) >= 3]
        total = sum(p[0] for p in parts)
        lon0 = sum(p[0] * p[1] for p in parts) / total
        lat0 = sum(p[0] * p[2] for p in parts) / total
        rings = [project_equirectangular(r, lon0, lat0) for r in rings]

    polygons = tuple(Polygon(r, w, n) for r, w, n in zip(rings, weights, names))
    return Region(kind="polygons", polygons=polygons, name=str(doc.get("name", label)))


def load_builtin_region(name: str) -> Region:
    """Load one of the bundled geographies (see ``BUILTIN_REGIONS``)."""
    if name not in BUILTIN_REGIONS:
        raise ConfigError(f"unknown builtin region {name!r}; choose from {BUILTIN_REGIONS}")
    text = resources.files("geoqnet.data").joinpath(f"{name}.geojson").read_text()
    return load_region(json.loads(text))
