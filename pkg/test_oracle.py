"""
Oracle Tests for verilocal
Tests spanning tree enumeration and the brute-force optimum
"""

from fractions import Fraction

import pytest

from errors import DimensionMismatch, TooLarge
from graph_core import ProblemInstance
from oracle import l1_cost, oracle_solve, oracle_ver, spanning_trees, tree_embedding
from reference_cases import TRIANGLE_CORNERS, complete_graph, instance


@pytest.mark.oracle
class TestSpanningTrees:
    """Test spanning tree enumeration"""

    def test_triangle(self, triangle):
        """Test the triangle has three spanning trees"""
        assert sorted(spanning_trees(triangle)) == [(0, 1), (0, 2), (1, 2)]

    @pytest.mark.parametrize("n,count", [(2, 1), (3, 3), (4, 16), (5, 125)])
    def test_cayley_counts(self, n, count):
        """Test complete graphs have n^(n-2) spanning trees"""
        assert sum(1 for _ in spanning_trees(complete_graph(n))) == count

    def test_trees_are_distinct(self, k4):
        """Test no tree is produced twice"""
        trees = list(spanning_trees(k4))
        assert len(trees) == len(set(trees))
        assert all(len(t) == 3 for t in trees)

    def test_parallel_orientations(self, opposite_pair):
        """Test both measurements between two nodes are separate trees"""
        assert sorted(spanning_trees(opposite_pair)) == [(0,), (1,)]


@pytest.mark.oracle
class TestTreeEmbedding:
    """Test exact fitting along a tree"""

    def test_fits_tree_edges(self, triangle_instance):
        """Test the path 1-2-3 carries the outliers of its edges"""
        embedding = tree_embedding(instance(triangle_instance.graph, [2, -1, 5]), (0, 1))
        assert embedding.x == (0, 2, 1)

    def test_reverse_orientation(self, triangle):
        """Test walking an edge against its orientation subtracts"""
        embedding = tree_embedding(instance(triangle, [0, 3, 4]), (1, 2))
        assert embedding.x == (0, 1, 4)

    def test_not_spanning(self, triangle_pendant):
        """Test a non-spanning edge set is refused"""
        with pytest.raises(ValueError):
            tree_embedding(instance(triangle_pendant, [0, 0, 0, 0]), (0, 1))

    def test_l1_cost(self, triangle):
        """Test the objective on scalar positions"""
        assert l1_cost(triangle.edges, [0, 0, 1], [0, 0, 0]) == 1
        assert l1_cost(triangle.edges, [0, 0, 1], [0, 1, 2]) == 3


@pytest.mark.oracle
@pytest.mark.critical
class TestOracleSolve:
    """Test the brute-force optimum"""

    def test_triangle(self, triangle_instance, config):
        """Test the triangle optimum and its three minimizers"""
        result = oracle_solve(triangle_instance, config)
        assert result.cost == 1
        assert set(result.embeddings) == TRIANGLE_CORNERS
        assert result.trees_examined == 3
        assert result.origin_is_optimal

    def test_non_verifiable(self, two_nodes, config):
        """Test a lone edge is fit exactly"""
        result = oracle_solve(instance(two_nodes, [Fraction(5, 2)]), config)
        assert result.cost == 0
        assert result.embeddings == ((0, Fraction(5, 2)),)
        assert not result.origin_is_optimal
        assert oracle_ver(instance(two_nodes, [1]), config) == 0

    def test_verifiable(self, k4, config):
        """Test a single K4 outlier leaves the origin optimal"""
        assert oracle_ver(instance(k4, [3, 0, 0, 0, 0, 0]), config) == 1

    def test_size_cap(self, config):
        """Test the oracle refuses large graphs"""
        config.oracle.max_nodes = 4
        with pytest.raises(TooLarge):
            oracle_solve(instance(complete_graph(5), [0] * 10), config)

    def test_one_dimension_only(self, triangle, config):
        """Test multi-dimensional instances are refused"""
        with pytest.raises(DimensionMismatch):
            oracle_solve(ProblemInstance(triangle, ((0, 0),) * 3), config)
