import numpy as np
import pytest

from geoqnet.netgen import Graph
from geoqnet.region import NodeSet

ACCEPTANCE_LINES: list[str] = []


def make_graph(n, edges, lengths=None, positions=None, layer="photonic"):
    """Small hand-built graph; lengths default to 1 km per edge."""
    pos = np.zeros((n, 2)) if positions is None else np.asarray(positions, dtype=float)
    e = np.array(sorted((min(i, j), max(i, j)) for i, j in edges), dtype=np.int64).reshape(-1, 2)
    if lengths is None:
        d = np.ones(len(e))
    elif isinstance(lengths, dict):
        d = np.array([lengths[(i, j)] if (i, j) in lengths else lengths[(j, i)] for i, j in e])
    else:
        order = sorted(range(len(edges)), key=lambda k: (min(edges[k]), max(edges[k])))
        d = np.asarray(lengths, dtype=float)[order]
    return Graph(NodeSet(pos, np.zeros(n, dtype=np.int64), 1.0), e, d, layer)


def two_route_graph():
    """Two routes from node 0 to node 2: 0-1-2 (2 x 30 km) and 0-3-4-2 (3 x 10 km)."""
    pos = [(0, 0), (15, np.sqrt(30**2 - 15**2)), (30, 0), (10, 0), (20, 0)]
    edges = [(0, 1), (1, 2), (0, 3), (3, 4), (4, 2)]
    return make_graph(5, edges, [30, 30, 10, 10, 10], pos)


@pytest.fixture
def two_routes():
    return two_route_graph()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
