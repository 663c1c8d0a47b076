"""
Error hierarchy for verilocal
Every error carries the exit code the command line front end reports for it
"""

from typing import List, Optional, Sequence, Tuple


class VerilocalError(Exception):
    """Base class for all verilocal errors"""
    exit_code = 4


class InputParseError(VerilocalError):
    """Input file is unreadable, not JSON, or does not match its schema"""
    exit_code = 2


class ValidationError(VerilocalError):
    """Input parsed but violates a domain invariant"""
    exit_code = 3


class Disconnected(ValidationError):
    """Undirected skeleton of the measurement graph is not connected"""

    def __init__(self, components: Sequence[Sequence[int]]):
        self.components: List[List[int]] = sorted(sorted(c) for c in components)
        super().__init__(f"Graph is disconnected, components: {self.components}")


class SelfLoop(ValidationError):
    """An edge joins a node to itself"""

    def __init__(self, edge_index: int, node: int):
        self.edge_index = edge_index
        self.node = node
        super().__init__(f"Edge {edge_index + 1} is a self-loop on node {node}")


class DuplicateEdge(ValidationError):
    """The same ordered pair appears twice"""

    def __init__(self, edge: Tuple[int, int], first_index: int, second_index: int):
        self.edge = edge
        self.first_index = first_index
        self.second_index = second_index
        super().__init__(
            f"Edge {edge} appears twice (positions {first_index + 1} and {second_index + 1})"
        )


class BadNodeId(ValidationError):
    """An edge references a node outside 1..num_nodes"""

    def __init__(self, edge_index: int, node: int, num_nodes: int):
        self.edge_index = edge_index
        self.node = node
        super().__init__(f"Edge {edge_index + 1} references node {node}, valid ids are 1..{num_nodes}")


class DimensionMismatch(ValidationError):
    """Vectors disagree on their dimension or count"""


class NonPositiveMagnitude(ValidationError):
    """Outlier magnitude used to realize a support must be > 0"""


class InvalidOutlierModel(ValidationError):
    """Outlier probabilities or magnitude ranges are out of range"""


class MixedGraphs(ValidationError):
    """Per-dimension results were computed on different graphs"""


class TooLarge(ValidationError):
    """Instance exceeds the brute-force oracle's size cap"""


class SolverError(VerilocalError):
    """Internal failure of the simplex machinery"""
    exit_code = 4


class InternalUnbounded(SolverError):
    """Dual simplex hit the unbounded-dual branch; valid instances never do"""


class CycleDetected(SolverError):
    """Pivot limit reached even with the anti-cycling rule engaged"""


class NotOptimal(SolverError):
    """Operation requires a tableau at dual simplex termination"""


class MaterializationCapExceeded(VerilocalError):
    """Combined corner count is larger than the configured cap"""
    exit_code = 5

    def __init__(self, count: int, cap: int):
        self.count = count
        self.cap = cap
        super().__init__(f"{count} combined corners exceed the materialization cap of {cap}")


class CornerSearchExhausted(VerilocalError):
    """Basis walk visited more bases than allowed"""
    exit_code = 5


class BudgetExceeded(VerilocalError):
    """Exact enumeration would evaluate more supports than the configured budget"""
    exit_code = 6

    def __init__(self, supports: int, budget: int, hint: Optional[str] = None):
        self.supports = supports
        self.budget = budget
        message = f"{supports} signed supports exceed the exact budget of {budget}"
        if hint:
            message = f"{message}; {hint}"
        super().__init__(message)
