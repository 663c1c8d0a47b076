"""
Graph Core Module for verilocal
Measurement graphs, embeddings, outlier supports and models, canonicalization
and the split into one-dimensional subproblems
"""

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from config import VerilocalConfiguration, verilocal_config
from errors import (
    BadNodeId,
    DimensionMismatch,
    Disconnected,
    DuplicateEdge,
    InvalidOutlierModel,
    NonPositiveMagnitude,
    SelfLoop,
    ValidationError,
)

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]
Vector = Tuple[Fraction, ...]


class Sign(Enum):
    """Sign of an outlier"""
    PLUS = "+"
    MINUS = "-"

    @property
    def unit(self) -> int:
        return 1 if self is Sign.PLUS else -1

    @classmethod
    def of(cls, value) -> Optional['Sign']:
        """Sign of a number, None for zero"""
        if value > 0:
            return cls.PLUS
        if value < 0:
            return cls.MINUS
        return None


@dataclass(frozen=True)
class MeasurementGraph:
    """Oriented graph of relative measurements; nodes are 1..num_nodes"""
    num_nodes: int
    edges: Tuple[Edge, ...]

    def __post_init__(self):
        object.__setattr__(self, 'edges', tuple((int(i), int(j)) for i, j in self.edges))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def nodes(self) -> range:
        return range(1, self.num_nodes + 1)

    def skeleton(self) -> nx.MultiGraph:
        """Undirected skeleton, one networkx edge per measurement keyed by edge index"""
        skeleton = nx.MultiGraph()
        skeleton.add_nodes_from(self.nodes)
        for index, (i, j) in enumerate(self.edges):
            skeleton.add_edge(i, j, key=index)
        return skeleton

    def induced_edges(self, nodes: Iterable[int]) -> Tuple[int, ...]:
        """Indices of edges with both endpoints in nodes"""
        members = set(nodes)
        return tuple(e for e, (i, j) in enumerate(self.edges) if i in members and j in members)

    def to_dict(self) -> Dict:
        return {
            'num_nodes': self.num_nodes,
            'edges': [{'i': i, 'j': j} for i, j in self.edges],
        }

    def __repr__(self):
        return f'<MeasurementGraph |V|={self.num_nodes} |E|={self.num_edges}>'


def validate_graph(g: MeasurementGraph) -> None:
    """Check the graph invariants, raising the first violation found"""
    if g.num_nodes < 1:
        raise ValidationError(f"num_nodes must be positive, got {g.num_nodes}")

    seen: Dict[Edge, int] = {}
    for index, (i, j) in enumerate(g.edges):
        for node in (i, j):
            if not 1 <= node <= g.num_nodes:
                raise BadNodeId(index, node, g.num_nodes)
        if i == j:
            raise SelfLoop(index, i)
        if (i, j) in seen:
            raise DuplicateEdge((i, j), seen[(i, j)], index)
        seen[(i, j)] = index

    components = list(nx.connected_components(g.skeleton()))
    if len(components) > 1:
        raise Disconnected(components)


@dataclass(frozen=True)
class Embedding:
    """Position of every node, all of dimension d"""
    positions: Tuple[Vector, ...]

    def __post_init__(self):
        positions = tuple(tuple(Fraction(v) for v in p) for p in self.positions)
        if not positions:
            raise DimensionMismatch("An embedding needs at least one node")
        d = len(positions[0])
        if d < 1 or any(len(p) != d for p in positions):
            raise DimensionMismatch("All positions must share a positive dimension")
        object.__setattr__(self, 'positions', positions)

    @property
    def d(self) -> int:
        return len(self.positions[0])

    @property
    def num_nodes(self) -> int:
        return len(self.positions)

    def shifted(self, offset: Sequence) -> 'Embedding':
        """Embedding translated by a common offset"""
        if len(offset) != self.d:
            raise DimensionMismatch(f"Offset has dimension {len(offset)}, embedding {self.d}")
        return Embedding(tuple(tuple(p[k] + Fraction(offset[k]) for k in range(self.d)) for p in self.positions))


@dataclass(frozen=True)
class SignedOutlierSupport:
    """Edges carrying outliers, with the sign of each; at most one entry per edge"""
    entries: Tuple[Tuple[int, Sign], ...] = ()

    def __post_init__(self):
        entries = tuple(sorted(((int(e), Sign(s)) for e, s in self.entries), key=lambda item: item[0]))
        indices = [e for e, _ in entries]
        if len(set(indices)) != len(indices):
            raise ValidationError(f"Edge listed twice in support: {indices}")
        if any(e < 0 for e in indices):
            raise ValidationError(f"Negative edge index in support: {indices}")
        object.__setattr__(self, 'entries', entries)

    @classmethod
    def from_signs(cls, signs: Sequence[int]) -> 'SignedOutlierSupport':
        """Build from a per-edge vector of -1, 0, +1"""
        return cls(tuple((e, Sign.PLUS if s > 0 else Sign.MINUS) for e, s in enumerate(signs) if s))

    def check_against(self, g: MeasurementGraph) -> None:
        for e, _ in self.entries:
            if e >= g.num_edges:
                raise ValidationError(f"Support references edge {e + 1}, graph has {g.num_edges}")

    def signs(self, num_edges: int) -> Tuple[int, ...]:
        """Per-edge vector of -1, 0, +1"""
        vector = [0] * num_edges
        for e, sign in self.entries:
            vector[e] = sign.unit
        return tuple(vector)

    @property
    def cardinality(self) -> int:
        return len(self.entries)

    @property
    def positive_count(self) -> int:
        return sum(1 for _, s in self.entries if s is Sign.PLUS)

    @property
    def negative_count(self) -> int:
        return sum(1 for _, s in self.entries if s is Sign.MINUS)

    def to_dict(self) -> Dict:
        return {'support': [{'edge': e + 1, 'sign': s.value} for e, s in self.entries]}


@dataclass(frozen=True)
class ProblemInstance:
    """Canonical localization problem: per-edge, per-dimension outliers"""
    graph: MeasurementGraph
    epsilon: Tuple[Vector, ...]

    def __post_init__(self):
        epsilon = tuple(tuple(Fraction(v) for v in row) for row in self.epsilon)
        if len(epsilon) != self.graph.num_edges:
            raise DimensionMismatch(f"{len(epsilon)} outlier rows for {self.graph.num_edges} edges")
        d = len(epsilon[0]) if epsilon else 1
        if d < 1 or any(len(row) != d for row in epsilon):
            raise DimensionMismatch("Every edge needs an outlier value per dimension")
        object.__setattr__(self, 'epsilon', epsilon)
        object.__setattr__(self, '_d', d)

    @property
    def d(self) -> int:
        return self._d

    @property
    def epsilon_1d(self) -> Tuple[Fraction, ...]:
        """Outliers of a one-dimensional instance as scalars"""
        if self.d != 1:
            raise DimensionMismatch(f"Instance has dimension {self.d}, expected 1")
        return tuple(row[0] for row in self.epsilon)

    def signed_support(self, dim: int = 0) -> SignedOutlierSupport:
        return SignedOutlierSupport.from_signs([(row[dim] > 0) - (row[dim] < 0) for row in self.epsilon])

    def objective(self, x: Sequence[Sequence]) -> Fraction:
        """Canonical l1 objective at a per-node embedding"""
        if len(x) != self.graph.num_nodes or any(len(p) != self.d for p in x):
            raise DimensionMismatch(f"Embedding must have {self.graph.num_nodes} positions of dimension {self.d}")
        total = Fraction(0)
        for (i, j), eps in zip(self.graph.edges, self.epsilon):
            for k in range(self.d):
                total += abs(Fraction(x[j - 1][k]) - Fraction(x[i - 1][k]) - eps[k])
        return total

    def objective_at_origin(self) -> Fraction:
        return sum((abs(v) for row in self.epsilon for v in row), Fraction(0))

    def to_dict(self) -> Dict:
        from serialization import format_rational
        data = self.graph.to_dict()
        data['epsilon'] = [[format_rational(v) for v in row] for row in self.epsilon]
        return data


def canonicalize(graph: MeasurementGraph, measurements: Sequence[Sequence], ground_truth: Embedding) -> ProblemInstance:
    """Move the ground truth to the origin; residuals become the outliers"""
    if ground_truth.num_nodes != graph.num_nodes:
        raise DimensionMismatch(f"Ground truth has {ground_truth.num_nodes} nodes, graph has {graph.num_nodes}")
    if len(measurements) != graph.num_edges:
        raise DimensionMismatch(f"{len(measurements)} measurements for {graph.num_edges} edges")

    d = ground_truth.d
    epsilon = []
    for index, ((i, j), t) in enumerate(zip(graph.edges, measurements)):
        if len(t) != d:
            raise DimensionMismatch(f"Measurement {index + 1} has dimension {len(t)}, ground truth {d}")
        xi, xj = ground_truth.positions[i - 1], ground_truth.positions[j - 1]
        epsilon.append(tuple(Fraction(t[k]) - (xj[k] - xi[k]) for k in range(d)))
    return ProblemInstance(graph, tuple(epsilon))


def split_dimensions(inst: ProblemInstance) -> List[ProblemInstance]:
    """One 1-D instance per coordinate"""
    if inst.d == 1:
        return [inst]
    return [ProblemInstance(inst.graph, tuple((row[k],) for row in inst.epsilon)) for k in range(inst.d)]


def realize_support(g: MeasurementGraph, support: SignedOutlierSupport, magnitude=Fraction(1)) -> ProblemInstance:
    """1-D instance with +-magnitude on support edges and 0 elsewhere"""
    magnitude = Fraction(magnitude)
    if magnitude <= 0:
        raise NonPositiveMagnitude(f"Magnitude must be positive, got {magnitude}")
    support.check_against(g)
    return ProblemInstance(g, tuple((magnitude * s,) for s in support.signs(g.num_edges)))


def reverse_edge(inst: ProblemInstance, edge: int) -> ProblemInstance:
    """Flip the stored orientation of one edge and negate its outlier"""
    edges = list(inst.graph.edges)
    i, j = edges[edge]
    edges[edge] = (j, i)
    epsilon = list(inst.epsilon)
    epsilon[edge] = tuple(-v for v in epsilon[edge])
    return ProblemInstance(MeasurementGraph(inst.graph.num_nodes, tuple(edges)), tuple(epsilon))


Interval = Tuple[Fraction, Fraction]


@dataclass(frozen=True)
class OutlierModel:
    """Per-edge outlier probabilities and magnitude supports"""
    p_plus: Tuple[Fraction, ...]
    p_minus: Tuple[Fraction, ...]
    magnitude_range_neg: Interval = (Fraction(-10), Fraction(-1))
    magnitude_range_pos: Interval = (Fraction(1), Fraction(10))

    def __post_init__(self):
        p_plus = tuple(Fraction(p) for p in self.p_plus)
        p_minus = tuple(Fraction(p) for p in self.p_minus)
        neg = tuple(Fraction(v) for v in self.magnitude_range_neg)
        pos = tuple(Fraction(v) for v in self.magnitude_range_pos)
        if len(p_plus) != len(p_minus):
            raise InvalidOutlierModel("p_plus and p_minus must cover the same edges")
        for e, (pp, pm) in enumerate(zip(p_plus, p_minus)):
            if not (0 < pp < 1 and 0 < pm < 1):
                raise InvalidOutlierModel(f"Edge {e + 1}: probabilities must lie in (0,1), got {pp}, {pm}")
            if pp + pm >= 1:
                raise InvalidOutlierModel(f"Edge {e + 1}: p_plus + p_minus = {pp + pm} must be < 1")
        if not (len(neg) == 2 and neg[0] < neg[1] < 0):
            raise InvalidOutlierModel(f"Negative magnitude range must satisfy lo < hi < 0, got {neg}")
        if not (len(pos) == 2 and 0 < pos[0] < pos[1]):
            raise InvalidOutlierModel(f"Positive magnitude range must satisfy 0 < lo < hi, got {pos}")
        object.__setattr__(self, 'p_plus', p_plus)
        object.__setattr__(self, 'p_minus', p_minus)
        object.__setattr__(self, 'magnitude_range_neg', neg)
        object.__setattr__(self, 'magnitude_range_pos', pos)

    @classmethod
    def homogeneous(cls, num_edges: int, p_plus, p_minus, **ranges) -> 'OutlierModel':
        return cls((Fraction(p_plus),) * num_edges, (Fraction(p_minus),) * num_edges, **ranges)

    @classmethod
    def symmetric(cls, num_edges: int, p, **ranges) -> 'OutlierModel':
        """p_plus = p_minus = p/2 on every edge"""
        half = Fraction(p) / 2
        return cls.homogeneous(num_edges, half, half, **ranges)

    @property
    def num_edges(self) -> int:
        return len(self.p_plus)

    @property
    def is_symmetric(self) -> bool:
        first = self.p_plus[0] if self.p_plus else None
        return all(pp == first and pm == first for pp, pm in zip(self.p_plus, self.p_minus))


def _uniform_rational(rng: np.random.Generator, interval: Interval, resolution: int) -> Fraction:
    """Uniform draw from the open interval on a grid of the given resolution"""
    lo, hi = interval
    step = int(rng.integers(1, resolution))
    return lo + (hi - lo) * Fraction(step, resolution)


def sample_outliers(g: MeasurementGraph, model: OutlierModel, d: int, rng_seed: int,
                    config: Optional[VerilocalConfiguration] = None) -> ProblemInstance:
    """Draw a d-dimensional instance from the outlier model; deterministic in rng_seed"""
    config = config or verilocal_config
    if model.num_edges != g.num_edges:
        raise InvalidOutlierModel(f"Model covers {model.num_edges} edges, graph has {g.num_edges}")
    if d < 1:
        raise DimensionMismatch(f"Dimension must be positive, got {d}")

    rng = np.random.default_rng(rng_seed)
    resolution = config.probability.magnitude_resolution
    epsilon = []
    for e in range(g.num_edges):
        p_plus, p_minus = float(model.p_plus[e]), float(model.p_minus[e])
        row = []
        for u in rng.random(d):
            if u < p_plus:
                row.append(_uniform_rational(rng, model.magnitude_range_pos, resolution))
            elif u < p_plus + p_minus:
                row.append(_uniform_rational(rng, model.magnitude_range_neg, resolution))
            else:
                row.append(Fraction(0))
        epsilon.append(tuple(row))

    instance = ProblemInstance(g, tuple(epsilon))
    logger.debug(f"Sampled {sum(1 for row in epsilon for v in row if v)} outliers over {g.num_edges} edges x {d} dims")
    return instance
