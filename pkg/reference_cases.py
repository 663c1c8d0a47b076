"""
Reference cases for verilocal tests
Known instances, published census counts and hypothesis strategies
"""

from fractions import Fraction
from itertools import combinations
from typing import Sequence

from hypothesis import strategies as st

from graph_core import MeasurementGraph, ProblemInstance

# Complete graph on 5 nodes, every signed support enumerated
K5_VERIFIABLE_COUNTS = (1, 20, 180, 920, 2680, 4524, 4560, 2820, 1080, 240, 24)
K5_TOTAL_COUNTS = (1, 20, 180, 960, 3360, 8064, 13440, 15360, 11520, 5120, 1024)


def complete_graph(n: int) -> MeasurementGraph:
    return MeasurementGraph(n, tuple(combinations(range(1, n + 1), 2)))


def two_node_graph() -> MeasurementGraph:
    return MeasurementGraph(2, ((1, 2),))


def triangle_graph() -> MeasurementGraph:
    return MeasurementGraph(3, ((1, 2), (2, 3), (1, 3)))


def triangle_with_pendant_graph() -> MeasurementGraph:
    return MeasurementGraph(4, ((1, 2), (2, 3), (1, 3), (3, 4)))


def opposite_pair_graph() -> MeasurementGraph:
    """Two nodes measured in both directions"""
    return MeasurementGraph(2, ((1, 2), (2, 1)))


def instance(g: MeasurementGraph, values: Sequence) -> ProblemInstance:
    """1-D instance from scalar outliers"""
    return ProblemInstance(g, tuple((Fraction(v),) for v in values))


TRIANGLE_CORNERS = {
    (Fraction(0), Fraction(0), Fraction(0)),
    (Fraction(0), Fraction(0), Fraction(1)),
    (Fraction(0), Fraction(1), Fraction(1)),
}


@st.composite
def connected_graphs(draw, min_nodes: int = 2, max_nodes: int = 6, max_edges: int = 9):
    """Connected measurement graphs: a random spanning tree plus extra oriented edges"""
    n = draw(st.integers(min_nodes, max_nodes))
    edges = []
    for v in range(2, n + 1):
        parent = draw(st.integers(1, v - 1))
        edges.append((parent, v) if draw(st.booleans()) else (v, parent))

    unused = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1) if i != j and (i, j) not in edges]
    room = max(0, min(max_edges - len(edges), len(unused)))
    if room:
        extra = draw(st.lists(st.sampled_from(unused), max_size=room, unique=True))
        edges.extend(extra)
    order = draw(st.permutations(edges))
    return MeasurementGraph(n, tuple(order))


def sign_vectors(num_edges: int):
    return st.lists(st.sampled_from((-1, 0, 1)), min_size=num_edges, max_size=num_edges).map(tuple)


def positive_rationals(max_numerator: int = 20, max_denominator: int = 6):
    return st.builds(Fraction, st.integers(1, max_numerator), st.integers(1, max_denominator))


@st.composite
def graphs_with_signs(draw, **graph_options):
    g = draw(connected_graphs(**graph_options))
    return g, draw(sign_vectors(g.num_edges))


@st.composite
def graphs_with_outliers(draw, **graph_options):
    """Graph plus a 1-D instance with random signs and random positive magnitudes"""
    g, signs = draw(graphs_with_signs(**graph_options))
    magnitudes = draw(st.lists(positive_rationals(), min_size=g.num_edges, max_size=g.num_edges))
    return instance(g, [s * u for s, u in zip(signs, magnitudes)])
