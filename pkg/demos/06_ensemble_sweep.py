"""
Seeded ensembles and scaling fits
=================================

A sweep repeats the whole pipeline for several N with per-sample seeds
derived by hashing (base seed, N, index), then fits <l> ~ N^delta.
"""

import tempfile
from pathlib import Path

from geoqnet.ensemble import RunConfig, sweep, write_sweep

config = RunConfig(region={"kind": "builtin", "name": "two_cluster"},
                   n_values=(100, 200, 400), samples=5, base_seed=1)
result = sweep(config)

for row in result.rows:
    l = row.metrics["avg_l_hops"]
    rk, rh = row.metrics["avg_rate_hz_km"], row.metrics["avg_rate_hz_hops"]
    print(f"N={row.n_nodes:4d}  <l> = {l.mean:5.2f} +/- {l.stderr:.2f}  "
          f"R km {rk.mean:7.1f} Hz, R hops {rh.mean:7.1f} Hz")

for metric, fit in result.fits["scaling"].items():
    print(f"{metric:16s} delta = {fit['params']['delta']:.3f}")

with tempfile.TemporaryDirectory() as tmp:
    out = write_sweep(result, Path(tmp) / "run")
    print(sorted(p.relative_to(out).as_posix() for p in out.rglob("*") if p.is_file()))
