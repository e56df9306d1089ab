"""Seeded Monte Carlo ensembles over network sizes.

One *sample* runs the full pipeline (node placement, fiber layer, photonic
layer, statistics, rates) for a seed derived from ``(base_seed, N, index)``.
A *sweep* runs every ``(N, index)`` job, aggregates means and standard errors
per ``N`` and fits the size scaling of the path statistics.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .errors import ConfigError, FitError, GeoQNetError
from .fitting import fit_gaussian, fit_poisson, fit_power_law, fit_two_gaussian
from .metrics import (
    MODES,
    DegreeHistogram,
    bin_count_for_size,
    clustering_coefficient,
    connected_components,
    path_table,
)
from .netgen import WaxmanParams, build_network
from .region import Region, load_builtin_region, load_region, sample_nodes
from .repeater import RepeaterParams, rates_from_table

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger(__name__)

# fixed histogram grids so per-sample histograms can be pooled by summation
RATE_BINS = np.logspace(-4, 6, 101)
KM_BINS = np.linspace(0.0, 12000.0, 121)
HOP_BINS = np.arange(0.5, 200.5)

STATS_COLUMNS = ["seed", "N", "rho", "NG_over_N", "avg_C", "avg_l_hops", "diameter_hops",
                 "avg_dist_m"]


# --- configuration -------------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a sweep.

    ``region`` is one of::

        {"kind": "disk", "radius_km": 1646.4}
        {"kind": "disk", "density_per_km2": 1e-5}   # radius follows N
        {"kind": "builtin", "name": "two_cluster" | "brazil_coarse"}
        {"kind": "polygons", "path": "states.geojson"}
    """

    region: dict
    n_values: tuple[int, ...] = (100,)
    waxman: WaxmanParams = WaxmanParams()
    repeater: RepeaterParams = RepeaterParams()
    samples: int = 100
    base_seed: int = 0
    modes: tuple[str, ...] = MODES
    compute_rates: bool = True
    degree_bins: int | None = None
    layer: str = "photonic"  # graph the statistics are computed on
    output_dir: str = "out"

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.n_values or min(self.n_values) < 2:
            raise ConfigError("n_values must be non-empty and every N >= 2")
        if self.samples < 1:
            raise ConfigError("samples must be >= 1")
        bad = [m for m in self.modes if m not in MODES]
        if bad or not self.modes:
            raise ConfigError(f"modes must be a non-empty subset of {MODES}, got {self.modes}")
        if self.layer not in ("photonic", "fiber"):
            raise ConfigError(f"layer must be 'photonic' or 'fiber', got {self.layer!r}")
        if self.degree_bins is not None and self.degree_bins < 1:
            raise ConfigError("degree_bins must be >= 1")
        _validate_region_spec(self.region)

    def region_for(self, n_nodes: int) -> Region:
        spec = self.region
        if spec["kind"] == "disk" and "density_per_km2" in spec:
            return Region.disk_for_density(n_nodes, float(spec["density_per_km2"]))
        return _static_region(json.dumps(spec, sort_keys=True))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_values"] = list(self.n_values)
        d["modes"] = list(self.modes)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RunConfig":
        d = dict(d)
        if "config" in d and "region" not in d:
            d = dict(d["config"])  # a manifest.json
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "region" not in d:
            raise ConfigError("config needs a 'region' entry")
        try:
            wax = WaxmanParams(**d.pop("waxman", {}))
            rep_d = dict(d.pop("repeater", {}))
            rep_d.setdefault("gamma_db_per_km", wax.gamma_db_per_km)
            rep = RepeaterParams(**rep_d)
            return cls(waxman=wax, repeater=rep, **d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


def _validate_region_spec(spec):
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("region must be a mapping with a 'kind'")
    kind = spec["kind"]
    if kind == "disk":
        if ("radius_km" in spec) == ("density_per_km2" in spec):
            raise ConfigError("disk region needs exactly one of radius_km, density_per_km2")
        value = spec.get("radius_km", spec.get("density_per_km2"))
        if not isinstance(value, (int, float)) or not value > 0:
            raise ConfigError("disk radius/density must be a positive number")
    elif kind == "builtin":
        if "name" not in spec:
            raise ConfigError("builtin region needs a 'name'")
    elif kind == "polygons":
        if "path" not in spec:
            raise ConfigError("polygon region needs a 'path'")
    else:
        raise ConfigError(f"unknown region kind {kind!r}")


@lru_cache(maxsize=16)
def _static_region(spec_json: str) -> Region:
    spec = json.loads(spec_json)
    if spec["kind"] == "disk":
        return Region.disk(float(spec["radius_km"]))
    if spec["kind"] == "builtin":
        return load_builtin_region(spec["name"])
    path = Path(spec["path"])
    if not path.exists():
        raise ConfigError(f"region file not found: {path}")
    return load_region(path)


def load_config(path: str | Path) -> RunConfig:
    """Read a JSON or TOML run configuration (or a sweep ``manifest.json``)."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text()
    try:
        if path.suffix.lower() == ".toml":
            raw = tomllib.loads(text)
        else:
            raw = json.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"{path}: cannot parse config: {exc}") from exc
    region = raw.get("region") if isinstance(raw, dict) else None
    if isinstance(region, dict) and region.get("kind") == "polygons":
        # relative region paths are resolved against the config file
        p = Path(region["path"])
        if not p.is_absolute():
            raw = dict(raw, region=dict(region, path=str((path.parent / p).resolve())))
    return RunConfig.from_dict(raw)


def sample_seed(base_seed: int, n_nodes: int, index: int) -> int:
    """Stable 64-bit seed for one ensemble member."""
    digest = hashlib.blake2b(f"{base_seed}:{n_nodes}:{index}".encode(),
                             digest_size=8).digest()
    return int.from_bytes(digest, "little")


# --- one sample -----------------------------------------------------------------------


@dataclass
class SampleRecord:
    index: int
    n_nodes: int
    seed: int
    values: dict[str, float]
    status: str = "ok"
    degree_counts: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    hop_hist: dict[str, np.ndarray] = field(default_factory=dict)
    km_hist: dict[str, np.ndarray] = field(default_factory=dict)
    rate_hist: dict[str, np.ndarray] = field(default_factory=dict)

    def row(self) -> dict[str, Any]:
        return {"index": self.index, **self.values, "status": self.status}


def value_columns(config: RunConfig) -> list[str]:
    cols = STATS_COLUMNS + ["n_giant", "mean_degree"]
    for mode in config.modes:
        cols += [f"avg_l_{mode}", f"avg_dist_m_{mode}"]
        if config.compute_rates:
            cols.append(f"avg_rate_hz_{mode}")
    # drop duplicates while keeping order
    return list(dict.fromkeys(cols))


def sample_network(config: RunConfig, n_nodes: int, index: int):
    """Region, nodes and both graph layers of one ensemble member.

    Returns ``(seed, region, nodes, fiber, photonic)``.
    """
    seed = sample_seed(config.base_seed, n_nodes, index)
    region = config.region_for(n_nodes)
    nodes = sample_nodes(region, n_nodes, np.random.default_rng(seed))
    fiber, photonic = build_network(nodes, config.waxman, seed)
    return seed, region, nodes, fiber, photonic


def run_sample(config: RunConfig, n_nodes: int, index: int) -> SampleRecord:
    """Run the full pipeline for one ``(N, index)``; failures are recorded, not raised."""
    seed = sample_seed(config.base_seed, n_nodes, index)
    values = {c: math.nan for c in value_columns(config)}
    values.update(seed=seed, N=n_nodes)
    rec = SampleRecord(index, n_nodes, seed, values)
    try:
        _, region, _, fiber, photonic = sample_network(config, n_nodes, index)
        values["rho"] = n_nodes / region.area
        g = photonic if config.layer == "photonic" else fiber
        degrees = g.degrees()
        rec.degree_counts = np.bincount(degrees)
        values["mean_degree"] = float(degrees.mean())
        values["avg_C"] = clustering_coefficient(g)
        comp = connected_components(g)
        values["n_giant"] = comp.giant_size
        values["NG_over_N"] = comp.relative_size
        if comp.giant_size < 2:
            rec.status = "no_giant_cluster"
            return rec
        for mode in dict.fromkeys(("hops", "km") + config.modes):
            table = path_table(g, mode)
            hops = table.upper(table.hops)
            km = table.upper(table.km)
            if mode == "hops":
                values["avg_l_hops"] = float(hops.sum()) / len(hops)
                values["diameter_hops"] = int(table.hops.max())
            if mode == "km":
                values["avg_dist_m"] = 1000.0 * float(km.sum()) / len(km)
            if mode not in config.modes:
                continue
            values[f"avg_l_{mode}"] = float(hops.sum()) / len(hops)
            values[f"avg_dist_m_{mode}"] = 1000.0 * float(km.sum()) / len(km)
            rec.hop_hist[mode] = np.histogram(hops, HOP_BINS)[0]
            rec.km_hist[mode] = np.histogram(km, KM_BINS)[0]
            if config.compute_rates:
                summary = rates_from_table(table, config.repeater)
                values[f"avg_rate_hz_{mode}"] = summary.avg_rate_hz
                rec.rate_hist[mode] = np.histogram(summary.rates, RATE_BINS)[0]
    except GeoQNetError as exc:
        rec.status = f"error: {type(exc).__name__}: {exc}"
    return rec


# --- aggregation ----------------------------------------------------------------------


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    stderr: float  # nan when fewer than two valid samples
    count: int


@dataclass(frozen=True)
class AggregateRow:
    n_nodes: int
    rho: float
    n_samples: int
    n_failed: int
    metrics: dict[str, MetricSummary | None]


AGG_METRICS = ["NG_over_N", "avg_C", "mean_degree", "avg_l_hops", "diameter_hops",
               "avg_dist_m"]


def aggregate(records: list[SampleRecord]) -> list[AggregateRow]:
    """Mean and standard error per metric and N; NaN entries are skipped."""
    by_n: dict[int, list[SampleRecord]] = {}
    for r in records:
        by_n.setdefault(r.n_nodes, []).append(r)
    rows = []
    for n in sorted(by_n):
        group = sorted(by_n[n], key=lambda r: r.index)
        names = list(AGG_METRICS)
        for key in group[0].values:
            if key.startswith(("avg_l_", "avg_dist_m_", "avg_rate_hz_")) and key not in names:
                names.append(key)
        metrics: dict[str, MetricSummary | None] = {}
        for name in names:
            vals = np.array([r.values.get(name, math.nan) for r in group], dtype=float)
            vals = vals[np.isfinite(vals)]
            if vals.size == 0:
                log.warning("N=%d: no valid samples for %s", n, name)
                metrics[name] = None
                continue
            mean = math.fsum(vals) / vals.size
            se = float(np.std(vals, ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else math.nan
            metrics[name] = MetricSummary(mean, se, int(vals.size))
        rhos = [r.values["rho"] for r in group if math.isfinite(r.values.get("rho", math.nan))]
        rows.append(AggregateRow(n, rhos[0] if rhos else math.nan, len(group),
                                 sum(r.status.startswith("error") for r in group), metrics))
    return rows


# --- sweeps ---------------------------------------------------------------------------


@dataclass
class SweepResult:
    config: RunConfig
    records: list[SampleRecord]
    rows: list[AggregateRow]
    fits: dict[str, Any]
    notices: list[str]


def _run_job(args):
    config, n, idx = args
    return run_sample(config, n, idx)


def run_records(config: RunConfig, workers: int = 1) -> list[SampleRecord]:
    jobs = [(config, n, i) for n in config.n_values for i in range(config.samples)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_run_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [_run_job(j) for j in jobs]


def pooled_degree_histogram(records: list[SampleRecord], num_bins: int) -> DegreeHistogram:
    width = max(len(r.degree_counts) for r in records)
    counts = np.zeros(width, dtype=np.int64)
    for r in records:
        counts[:len(r.degree_counts)] += r.degree_counts
    return DegreeHistogram.from_degrees(np.repeat(np.arange(width), counts), num_bins)


def _fit_reports(config: RunConfig, records, rows, notices) -> dict[str, Any]:
    fits: dict[str, Any] = {"scaling": {}, "degree": {}}
    for metric in [f"avg_l_{m}" for m in config.modes] + [f"avg_dist_m_{m}" for m in config.modes]:
        pts = [(r.n_nodes, r.metrics[metric].mean) for r in rows
               if r.metrics.get(metric) is not None and r.metrics[metric].mean > 0]
        if len(pts) < 3:
            notices.append(f"power-law fit of {metric} skipped: {len(pts)} usable N value(s), need 3")
            continue
        fits["scaling"][metric] = fit_power_law(pts).report()
    for n in config.n_values:
        group = [r for r in records if r.n_nodes == n and len(r.degree_counts)]
        if not group:
            continue
        bins = config.degree_bins or bin_count_for_size(n)
        hist = pooled_degree_histogram(group, bins)
        reports = []
        for fitter in (fit_poisson, fit_gaussian, fit_two_gaussian):
            try:
                reports.append(fitter(hist).report())
            except FitError as exc:
                notices.append(f"N={n}: {fitter.__name__} failed: {exc}")
        fits["degree"][str(n)] = reports
    return fits


def sweep(config: RunConfig, workers: int = 1) -> SweepResult:
    """Run all samples, aggregate per N and fit the scaling laws."""
    records = run_records(config, workers)
    rows = aggregate(records)
    notices = [f"N={r.n_nodes}: {r.n_failed} failed sample(s)" for r in rows if r.n_failed]
    fits = _fit_reports(config, records, rows, notices)
    return SweepResult(config, records, rows, fits, notices)


# --- output ---------------------------------------------------------------------------


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "" if not math.isfinite(value) else repr(float(value))
    return str(value)


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")


def manifest(config: RunConfig, **extra) -> dict:
    return {"package": "geoqnet", "version": __version__, "base_seed": config.base_seed,
            "config": config.to_dict(), **extra}


def _hist_rows(edges, counts):
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    width = np.diff(edges)
    dens = counts / (total * width) if total > 0 else np.zeros_like(counts)
    return [(edges[i], edges[i + 1], dens[i]) for i in range(len(counts))]


def write_sweep(result: SweepResult, out_dir: str | Path) -> Path:
    """Write samples, aggregates, fits, figure tables and the manifest."""
    config = result.config
    out = Path(out_dir)
    (out / "samples").mkdir(parents=True, exist_ok=True)
    (out / "figures").mkdir(exist_ok=True)
    cols = value_columns(config)

    for n in config.n_values:
        recs = sorted((r for r in result.records if r.n_nodes == n), key=lambda r: r.index)
        # the per-sample statistics columns come first, then the extras
        k = len(STATS_COLUMNS)
        write_csv(out / "samples" / f"N{n}.csv", cols[:k] + ["index"] + cols[k:] + ["status"],
                  [[r.values[c] for c in cols[:k]] + [r.index]
                   + [r.values[c] for c in cols[k:]] + [r.status] for r in recs])

    names = list(dict.fromkeys(m for row in result.rows for m in row.metrics))
    header = ["N", "rho", "samples", "failed"]
    for name in names:
        header += [f"{name}_mean", f"{name}_stderr", f"{name}_count"]
    table = []
    for row in result.rows:
        line = [row.n_nodes, row.rho, row.n_samples, row.n_failed]
        for name in names:
            s = row.metrics.get(name)
            line += [s.mean, s.stderr, s.count] if s else [math.nan, math.nan, 0]
        table.append(line)
    write_csv(out / "aggregate.csv", header, table)
    write_csv(out / "figures" / "fig3_stats.csv", header, table)

    path_header = ["N", "mode", "avg_l_mean", "avg_l_stderr", "avg_dist_m_mean",
                   "avg_dist_m_stderr"]
    path_rows = []
    for row in result.rows:
        for mode in config.modes:
            l, d = row.metrics.get(f"avg_l_{mode}"), row.metrics.get(f"avg_dist_m_{mode}")
            path_rows.append([row.n_nodes, mode,
                              l.mean if l else math.nan, l.stderr if l else math.nan,
                              d.mean if d else math.nan, d.stderr if d else math.nan])
    write_csv(out / "figures" / "fig7_paths.csv", path_header, path_rows)

    for n in config.n_values:
        group = [r for r in result.records if r.n_nodes == n and len(r.degree_counts)]
        if group:
            hist = pooled_degree_histogram(group, config.degree_bins or bin_count_for_size(n))
            write_csv(out / "figures" / f"fig2_degree_N{n}.csv", ["bin_lo", "bin_hi", "density"],
                      zip(hist.bin_edges[:-1], hist.bin_edges[1:], hist.density))
        for mode in config.modes:
            for tag, edges, attr in (("fig5_hops", HOP_BINS, "hop_hist"),
                                     ("fig5_km", KM_BINS, "km_hist"),
                                     ("fig8_rates", RATE_BINS, "rate_hist")):
                parts = [getattr(r, attr)[mode] for r in group if mode in getattr(r, attr)]
                if parts:
                    write_csv(out / "figures" / f"{tag}_{mode}_N{n}.csv",
                              ["bin_lo", "bin_hi", "density"],
                              _hist_rows(edges, np.sum(parts, axis=0)))

    write_json(out / "fits.json", {"fits": result.fits, "notices": result.notices})
    write_json(out / "figures" / "table1_fits.json", result.fits["scaling"])
    write_json(out / "manifest.json", manifest(config))
    return out
