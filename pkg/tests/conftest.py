import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from peerplace.routing import PeeringSet
from peerplace.topology import Graph, all_pairs_distances, generate_regular


@pytest.fixture
def path3():
    return all_pairs_distances(generate_regular("path", 3))


@pytest.fixture
def cycle4():
    return all_pairs_distances(generate_regular("cycle", 4))


@st.composite
def connected_graphs(draw, min_n=2, max_n=7):
    """Random spanning tree plus random extra edges."""
    n = draw(st.integers(min_n, max_n))
    edges = set()
    for v in range(1, n):
        u = draw(st.integers(0, v - 1))
        edges.add((u, v))
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=n))
    for u, v in extra:
        if u != v:
            edges.add((min(u, v), max(u, v)))
    return Graph.from_edges(n, edges)


@st.composite
def graphs_with_links(draw, min_links=1, max_n=6):
    g = draw(connected_graphs(max_n=max_n))
    n = g.n
    links = draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), min_size=min_links, max_size=n * n))
    return g, PeeringSet(links)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
