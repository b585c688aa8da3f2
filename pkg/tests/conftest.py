import io
from pathlib import Path

import numpy as np
import pytest

from clusterlp.graph import Graph, load_edge_list, read_edge_list

DATA = Path(__file__).parent / "data"


def graph_from_text(text, directed=False):
    return load_edge_list(io.StringIO(text), directed=directed)


def random_graph(n, p, seed, directed=False):
    rng = np.random.default_rng(seed)
    edges = [(i, j) for i in range(n) for j in range(n)
             if i != j and (directed or i < j) and rng.random() < p]
    return Graph.from_edges(edges, n=n, directed=directed)


@pytest.fixture(scope="session")
def karate():
    return read_edge_list(DATA / "karate.edges")


@pytest.fixture(scope="session")
def ten_node():
    # two 5-cliques joined by the bridge 4-5
    edges = [(i, j) for i in range(5) for j in range(i + 1, 5)]
    edges += [(i + 5, j + 5) for i, j in edges] + [(4, 5)]
    return Graph.from_edges(edges, n=10)


@pytest.fixture(scope="session")
def small_directed():
    return random_graph(30, 0.12, seed=3, directed=True)


# one line per acceptance criterion, shown in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
