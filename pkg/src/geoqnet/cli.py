"""Command-line entry point: ``geoqnet {generate,stats,rates,sweep,verify}``.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 runtime error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import os
import sys
from pathlib import Path

from .ensemble import (
    STATS_COLUMNS,
    RunConfig,
    load_config,
    manifest,
    sample_network,
    sweep,
    write_csv,
    write_json,
    write_sweep,
)
from .errors import ConfigError, FitError, GeometryError
from .fitting import fit_gaussian, fit_poisson, fit_two_gaussian
from .metrics import (
    bin_count_for_size,
    clustering_coefficient,
    connected_components,
    degree_histogram,
    path_table,
)
from .netgen import (
    Graph,
    read_edges_csv,
    read_nodes_csv,
    write_edges_csv,
    write_nodes_csv,
)
from .repeater import rates_from_table
from .verify import run_checks

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3

log = logging.getLogger("geoqnet")


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _size(text: str) -> int:
    value = int(text)
    if value < 2:
        raise argparse.ArgumentTypeError(f"N must be >= 2, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geoqnet",
                                     description="Fiber-based quantum network simulator.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, graph_input=False, sizes="single"):
        p.add_argument("--config", type=Path, help="run configuration (JSON or TOML)")
        if sizes == "single":
            p.add_argument("--n", type=_size, help="number of nodes")
        else:
            p.add_argument("--n", type=_size, nargs="+", help="sweep values of N")
        p.add_argument("--seed", type=int, help="base seed")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--workers", type=_positive, default=os.cpu_count() or 1)
        if graph_input:
            p.add_argument("--graph", type=Path,
                           help="directory written by 'generate' (nodes.csv, edges.csv, manifest.json)")

    common(sub.add_parser("generate", help="sample one network and write node/edge lists"))
    p = sub.add_parser("stats", help="network statistics and degree fits")
    common(p, graph_input=True)
    p = sub.add_parser("rates", help="repetition rates over the giant cluster")
    common(p, graph_input=True)
    p.add_argument("--mode", choices=("hops", "km", "both"), default="both")
    p = sub.add_parser("sweep", help="seeded ensemble over N with aggregates and fits")
    common(p, sizes="many")
    p.add_argument("--mode", choices=("hops", "km", "both"))
    p.add_argument("--samples", type=_positive)
    sub.add_parser("verify", help="check the library against independent oracles")
    return parser


def _config_from_args(args) -> RunConfig:
    if args.config is None:
        raise ConfigError("--config is required")
    config = load_config(args.config)
    changes = {}
    n = getattr(args, "n", None)
    if n is not None:
        changes["n_values"] = tuple(n) if isinstance(n, list) else (n,)
    if args.seed is not None:
        changes["base_seed"] = args.seed
    if getattr(args, "samples", None) is not None:
        changes["samples"] = args.samples
    mode = getattr(args, "mode", None)
    if mode is not None:
        changes["modes"] = ("hops", "km") if mode == "both" else (mode,)
    if args.out is not None:
        changes["output_dir"] = str(args.out)
    return dataclasses.replace(config, **changes) if changes else config


def _out_dir(args, config: RunConfig | None) -> Path:
    if args.out is not None:
        return args.out
    return Path(config.output_dir) if config is not None else Path("out")


def _generate(config: RunConfig):
    return sample_network(config, config.n_values[0], 0)


def _load_graph(graph_dir: Path) -> tuple[RunConfig, dict[str, Graph], int]:
    man_path = graph_dir / "manifest.json"
    for f in (man_path, graph_dir / "nodes.csv", graph_dir / "edges.csv"):
        if not f.exists():
            raise ConfigError(f"graph file not found: {f}")
    man = json.loads(man_path.read_text())
    config = RunConfig.from_dict(man["config"])
    nodes = read_nodes_csv(graph_dir / "nodes.csv", float(man["area_km2"]))
    layers = read_edges_csv(graph_dir / "edges.csv", nodes)
    return config, layers, int(man["sample_seed"])


def _graph_for(args) -> tuple[RunConfig, Graph, int]:
    """The graph to analyse: loaded from ``--graph`` or generated from the config."""
    if args.graph is not None:
        config, layers, seed = _load_graph(args.graph)
        if args.config is not None:
            config = _config_from_args(args)
        elif getattr(args, "mode", None):
            mode = args.mode
            config = dataclasses.replace(
                config, modes=("hops", "km") if mode == "both" else (mode,))
        return config, layers[config.layer], seed
    config = _config_from_args(args)
    seed, _, _, fiber, photonic = _generate(config)
    return config, (photonic if config.layer == "photonic" else fiber), seed


def cmd_generate(args) -> int:
    config = _config_from_args(args)
    seed, region, nodes, fiber, photonic = _generate(config)
    out = _out_dir(args, config)
    out.mkdir(parents=True, exist_ok=True)
    write_nodes_csv(out / "nodes.csv", nodes)
    write_edges_csv(out / "edges.csv", fiber, photonic)
    write_json(out / "manifest.json",
               manifest(config, command="generate", n_nodes=len(nodes), sample_seed=seed,
                        area_km2=region.area, n_fiber_edges=fiber.n_edges,
                        n_photonic_edges=photonic.n_edges))
    print(f"wrote {len(nodes)} nodes, {fiber.n_edges} fiber and {photonic.n_edges} "
          f"photonic edges to {out}")
    return EXIT_OK


def network_stats(g: Graph, workers: int = 1, num_bins: int | None = None) -> dict:
    """Summary statistics of one graph layer as a JSON-ready dict."""
    comp = connected_components(g)
    hist = degree_histogram(g, num_bins or bin_count_for_size(g.n_nodes))
    out = {"N": g.n_nodes, "rho": g.nodes.density, "n_edges": g.n_edges,
           "mean_degree": hist.mean_degree, "avg_C": clustering_coefficient(g),
           "n_giant": comp.giant_size, "NG_over_N": comp.relative_size,
           "degree_counts": {str(k): c for k, c in hist.counts.items()},
           "degree_histogram": {"bin_lo": hist.bin_edges[:-1].tolist(),
                                "bin_hi": hist.bin_edges[1:].tolist(),
                                "density": hist.density.tolist()}}
    if comp.giant_size >= 2:
        for mode in ("hops", "km"):
            table = path_table(g, mode, workers=workers)
            hops, km = table.upper(table.hops), table.upper(table.km)
            out[f"avg_l_{mode}"] = float(hops.sum()) / len(hops)
            out[f"avg_dist_m_{mode}"] = 1000.0 * float(km.sum()) / len(km)
            if mode == "hops":
                out["diameter_hops"] = int(table.hops.max())
    fits, notices = [], []
    for fitter in (fit_poisson, fit_gaussian, fit_two_gaussian):
        try:
            fits.append(fitter(hist).report())
        except FitError as exc:
            notices.append(f"{fitter.__name__} failed: {exc}")
    out["fits"] = fits
    out["notices"] = notices
    return out


def cmd_stats(args) -> int:
    config, g, seed = _graph_for(args)
    stats = network_stats(g, args.workers, config.degree_bins)
    stats["seed"] = seed
    out = _out_dir(args, config)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "stats.json", stats)
    write_csv(out / "stats.csv", STATS_COLUMNS,
              [[stats.get({"avg_dist_m": "avg_dist_m_km"}.get(c, c), math.nan)
                for c in STATS_COLUMNS]])
    h = stats["degree_histogram"]
    write_csv(out / "degree_histogram.csv", ["bin_lo", "bin_hi", "density"],
              zip(h["bin_lo"], h["bin_hi"], h["density"]))
    print(json.dumps({k: stats[k] for k in ("N", "mean_degree", "avg_C", "NG_over_N")}))
    return EXIT_OK


def cmd_rates(args) -> int:
    config, g, _ = _graph_for(args)
    out = _out_dir(args, config)
    out.mkdir(parents=True, exist_ok=True)
    for mode in config.modes:
        summary = rates_from_table(path_table(g, mode, workers=args.workers), config.repeater)
        write_json(out / f"rates_{mode}.json", summary.summary())
        write_csv(out / f"rates_{mode}.csv",
                  ["u", "v", "mode", "m", "L_km", "P0", "T_mean_s", "rate_hz"],
                  zip(summary.u, summary.v, [mode] * summary.n_pairs, summary.m,
                      summary.length_km, summary.p0, summary.mean_time_s, summary.rates))
        print(f"{mode}: average rate {summary.avg_rate_hz:.6g} Hz over "
              f"{summary.n_pairs} pairs")
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _config_from_args(args)
    result = sweep(config, workers=args.workers)
    out = write_sweep(result, _out_dir(args, config))
    for notice in result.notices:
        print(f"notice: {notice}")
    print(f"wrote sweep over N={list(config.n_values)} to {out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = run_checks()
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


COMMANDS = {"generate": cmd_generate, "stats": cmd_stats, "rates": cmd_rates,
            "sweep": cmd_sweep, "verify": cmd_verify}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, GeometryError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - mapped to the runtime exit code
        log.debug("runtime failure", exc_info=True)
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
