"""
Command-line workflow
=====================

The same pipeline from the shell. Each step below is equivalent to running
``geoqnet <command> ...`` (or ``python -m geoqnet``).
"""

import tempfile
from pathlib import Path

from geoqnet.cli import main

root = Path(__file__).resolve().parents[1]
with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    cfg = str(root / "configs" / "two_cluster.toml")
    main(["generate", "--config", cfg, "--n", "300", "--seed", "7", "--out", str(tmp / "g")])
    main(["stats", "--graph", str(tmp / "g"), "--out", str(tmp / "stats")])
    main(["rates", "--graph", str(tmp / "g"), "--mode", "both", "--out", str(tmp / "rates")])
    main(["sweep", "--config", cfg, "--n", "100", "200", "--samples", "3",
          "--out", str(tmp / "sweep")])
    print((tmp / "stats" / "stats.csv").read_text())
