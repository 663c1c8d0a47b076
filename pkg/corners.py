"""
Corner Enumeration Module for verilocal
Reads the optimal face off a solved tableau, walks its corners, classifies
verifiability and extracts maximal verifiable components
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Set, Tuple

import networkx as nx

from config import VerilocalConfiguration, verilocal_config
from errors import (
    CornerSearchExhausted,
    DimensionMismatch,
    InternalUnbounded,
    MaterializationCapExceeded,
    MixedGraphs,
    NotOptimal,
)
from graph_core import Embedding, MeasurementGraph, ProblemInstance, split_dimensions
from lp_simplex import ColumnKind, SolveResult, Tableau, extract_primal, optimal_face_extent, solve_instance

logger = logging.getLogger(__name__)


class Classification(Enum):
    """Verifiability class of an instance"""
    UNIQUELY_VERIFIABLE = "UniquelyVerifiable"
    VERIFIABLE = "Verifiable"
    NON_VERIFIABLE = "NonVerifiable"

    @property
    def is_verifiable(self) -> bool:
        return self is not Classification.NON_VERIFIABLE


@dataclass(frozen=True)
class Corner:
    """Vertex of the optimal set of a 1-D instance"""
    x: Tuple[Fraction, ...]
    edge_costs: Tuple[Fraction, ...]
    fit_edges: Tuple[int, ...] = field(compare=False, default=())

    @property
    def is_origin(self) -> bool:
        return all(v == 0 for v in self.x)

    @property
    def cost(self) -> Fraction:
        return sum(self.edge_costs, Fraction(0))

    def to_dict(self) -> Dict:
        from serialization import format_rational
        return {
            'x': [format_rational(v) for v in self.x],
            'edge_costs': [format_rational(v) for v in self.edge_costs],
        }


@dataclass
class CornerSet:
    """All corners of one 1-D instance with its classification"""
    graph: MeasurementGraph
    corners: List[Corner]
    classification: Classification
    optimal_cost: Fraction
    origin_cost: Fraction

    def __len__(self):
        return len(self.corners)

    @property
    def embeddings(self) -> Set[Tuple[Fraction, ...]]:
        return {c.x for c in self.corners}

    def to_dict(self) -> Dict:
        from serialization import format_rational
        return {
            'classification': self.classification.value,
            'optimal_cost': format_rational(self.optimal_cost),
            'origin_cost': format_rational(self.origin_cost),
            'corners': [c.to_dict() for c in self.corners],
        }


@dataclass(frozen=True)
class ComponentReport:
    """Maximal node sets whose positions are zero in every corner"""
    components: Tuple[Tuple[int, ...], ...]
    edges: Tuple[Tuple[int, ...], ...]

    def to_dict(self) -> List[List[int]]:
        return [list(c) for c in self.components]


def _decide(corners: Sequence[Corner], optimal_cost: Fraction, origin_cost: Fraction) -> Classification:
    if origin_cost > optimal_cost:
        return Classification.NON_VERIFIABLE
    if len(corners) == 1 and corners[0].is_origin:
        return Classification.UNIQUELY_VERIFIABLE
    return Classification.VERIFIABLE


def classify(cs: CornerSet) -> Classification:
    """Uniquely verifiable iff the corners are exactly the origin; non-verifiable iff the origin is suboptimal"""
    if not cs.corners:
        raise ValueError("Cannot classify an empty corner set")
    return _decide(cs.corners, cs.optimal_cost, cs.origin_cost)


def classify_solution(result: SolveResult, config: Optional[VerilocalConfiguration] = None) -> Classification:
    """Classification from one optimal tableau, without walking its bases

    The origin is the only optimum iff every coordinate spans {0} over the
    optimal set.
    """
    lp = result.tableau.lp
    origin_cost = sum((abs(v) for v in lp.epsilon), Fraction(0))
    if origin_cost > result.cost:
        return Classification.NON_VERIFIABLE
    for node in range(2, lp.graph.num_nodes + 1):
        if optimal_face_extent(result.tableau, node, config) != (0, 0):
            return Classification.VERIFIABLE
    return Classification.UNIQUELY_VERIFIABLE


@dataclass(frozen=True)
class OptimalFace:
    """Optimal set of a 1-D instance as sign conditions on edge residuals

    Residual of edge e = (i, j) is x_j - x_i - eps_e. A positive reduced cost
    on Z_e pins it to zero, on S+_e forbids negative values and on S-_e
    forbids positive ones. The three reduced costs of an edge sum to one, so
    every edge carries at least one condition.
    """
    graph: MeasurementGraph
    epsilon: Tuple[Fraction, ...]
    may_rise: Tuple[bool, ...]
    may_fall: Tuple[bool, ...]

    @classmethod
    def from_tableau(cls, t: Tableau) -> 'OptimalFace':
        if not t.is_optimal():
            raise NotOptimal("The optimal face needs an optimal tableau")
        lp = t.lp
        rise, fall = [], []
        for e in range(1, lp.graph.num_edges + 1):
            pinned = t.reduced_costs[lp.column_index(ColumnKind.Z, e)] > 0
            rise.append(not pinned and t.reduced_costs[lp.column_index(ColumnKind.S_MINUS, e)] == 0)
            fall.append(not pinned and t.reduced_costs[lp.column_index(ColumnKind.S_PLUS, e)] == 0)
        return cls(lp.graph, lp.epsilon, tuple(rise), tuple(fall))

    def residuals(self, x: Sequence[Fraction]) -> List[Fraction]:
        return [x[j - 1] - x[i - 1] - eps for (i, j), eps in zip(self.graph.edges, self.epsilon)]

    def contains(self, x: Sequence[Fraction]) -> bool:
        if len(x) != self.graph.num_nodes or x[0] != 0:
            return False
        return all(
            (r <= 0 or rise) and (r >= 0 or fall)
            for r, rise, fall in zip(self.residuals(x), self.may_rise, self.may_fall)
        )

    def rigid_groups(self) -> List[FrozenSet[int]]:
        """Node groups joined by pinned edges, the gauge node's group first"""
        pinned = nx.Graph()
        pinned.add_nodes_from(self.graph.nodes)
        pinned.add_edges_from(
            edge for edge, rise, fall in zip(self.graph.edges, self.may_rise, self.may_fall) if not (rise or fall)
        )
        return sorted((frozenset(c) for c in nx.connected_components(pinned)), key=min)

    def tight_graph(self, x: Sequence[Fraction]) -> nx.Graph:
        """Nodes joined by the exactly fit edges of x"""
        tight = nx.Graph()
        tight.add_nodes_from(self.graph.nodes)
        tight.add_edges_from(edge for edge, r in zip(self.graph.edges, self.residuals(x)) if r == 0)
        return tight

    def corner(self, x: Tuple[Fraction, ...]) -> Corner:
        residuals = self.residuals(x)
        return Corner(
            x=x,
            edge_costs=tuple(abs(r) for r in residuals),
            fit_edges=tuple(e for e, r in enumerate(residuals) if r == 0),
        )


def _slide(face: OptimalFace, x: Sequence[Fraction], moving: FrozenSet[int], direction: int) -> Optional[Fraction]:
    """Longest step shifting the moving nodes by direction inside the face; None if a fit edge blocks"""
    limit = None
    for (i, j), r, rise, fall in zip(face.graph.edges, face.residuals(x), face.may_rise, face.may_fall):
        if (i in moving) == (j in moving):
            continue
        slope = direction if j in moving else -direction
        if r == 0:
            if not (rise if slope > 0 else fall):
                return None
            continue
        if r > 0 and slope < 0 and not fall:
            step = r
        elif r < 0 and slope > 0 and not rise:
            step = -r
        else:
            continue
        if limit is None or step < limit:
            limit = step
    if limit is None:
        raise InternalUnbounded("Optimal set is unbounded along a cut; it must be compact")
    return limit


def _shift(x: Sequence[Fraction], moving: FrozenSet[int], delta: Fraction) -> Tuple[Fraction, ...]:
    return tuple(v + delta if node in moving else v for node, v in enumerate(x, start=1))


def _settle(face: OptimalFace, x: Tuple[Fraction, ...]) -> Tuple[Fraction, ...]:
    """Slide detached pieces of an optimal point until its fit edges span the graph"""
    while True:
        parts = sorted(nx.connected_components(face.tight_graph(x)), key=min)
        if len(parts) == 1:
            return x
        moving = frozenset(parts[1])
        x = _shift(x, moving, _slide(face, x, moving, 1))


def _adjacent_corners(face: OptimalFace, x: Tuple[Fraction, ...],
                      groups: Sequence[FrozenSet[int]]) -> Iterator[Tuple[Fraction, ...]]:
    """Corners one face edge away from x

    Each face edge at x moves one side of a cut, both sides held together by
    fit edges, while the gauge side stays put. Pinned edges never cross a cut.
    """
    tight = face.tight_graph(x)
    movable = groups[1:]
    everything = frozenset(face.graph.nodes)
    for size in range(1, len(movable) + 1):
        for chosen in itertools.combinations(movable, size):
            moving = frozenset().union(*chosen)
            if not (nx.is_connected(tight.subgraph(moving)) and nx.is_connected(tight.subgraph(everything - moving))):
                continue
            for direction in (1, -1):
                step = _slide(face, x, moving, direction)
                if step is not None:
                    yield _shift(x, moving, direction * step)


def walk_optimal_corners(t: Tableau, config: Optional[VerilocalConfiguration] = None,
                         start: Optional[Sequence] = None) -> Iterator[Corner]:
    """Depth-first walk over the corners of the optimal set, each visited once

    Starts from start (any optimal embedding) or from the tableau's basic
    solution.
    """
    config = config or verilocal_config
    face = OptimalFace.from_tableau(t)
    point = extract_primal(t).x if start is None else tuple(Fraction(v) for v in start)
    if not face.contains(point):
        raise NotOptimal(f"Start point {[str(v) for v in point]} is not optimal")

    groups = face.rigid_groups()
    limit = config.enumeration.max_corners
    first = _settle(face, point)
    visited = {first}
    stack = [first]
    while stack:
        x = stack.pop()
        yield face.corner(x)
        for neighbour in _adjacent_corners(face, x, groups):
            if neighbour in visited:
                continue
            if len(visited) >= limit:
                raise CornerSearchExhausted(f"More than {limit} optimal corners; raise max_corners to continue")
            visited.add(neighbour)
            stack.append(neighbour)


def enumerate_corners(t: Tableau, config: Optional[VerilocalConfiguration] = None,
                      start: Optional[Sequence] = None) -> CornerSet:
    """Corners of the optimal set of the tableau's instance"""
    lp = t.lp
    corners = sorted(walk_optimal_corners(t, config, start), key=lambda c: c.x)
    optimal_cost = t.objective_value
    origin_cost = sum((abs(v) for v in lp.epsilon), Fraction(0))
    classification = _decide(corners, optimal_cost, origin_cost)
    logger.debug(f"{len(corners)} corners: {classification.value}")
    return CornerSet(
        graph=lp.graph,
        corners=corners,
        classification=classification,
        optimal_cost=optimal_cost,
        origin_cost=origin_cost,
    )


@dataclass
class CombinedCorners:
    """d-dimensional corners as the product of the per-dimension corner sets"""
    graph: MeasurementGraph
    per_dim: List[CornerSet]

    @property
    def d(self) -> int:
        return len(self.per_dim)

    @property
    def count(self) -> int:
        return math.prod(len(cs) for cs in self.per_dim)

    @property
    def optimal_cost(self) -> Fraction:
        return sum((cs.optimal_cost for cs in self.per_dim), Fraction(0))

    @property
    def classification(self) -> Classification:
        classes = [cs.classification for cs in self.per_dim]
        if all(c is Classification.UNIQUELY_VERIFIABLE for c in classes):
            return Classification.UNIQUELY_VERIFIABLE
        if all(c.is_verifiable for c in classes):
            return Classification.VERIFIABLE
        return Classification.NON_VERIFIABLE

    def iter_corners(self) -> Iterator[Embedding]:
        for choice in itertools.product(*(cs.corners for cs in self.per_dim)):
            yield Embedding(tuple(
                tuple(corner.x[node] for corner in choice) for node in range(self.graph.num_nodes)
            ))

    def materialize(self, cap: Optional[int] = None) -> List[Embedding]:
        """All combined corners as a list, refusing beyond cap"""
        cap = verilocal_config.enumeration.materialization_cap if cap is None else cap
        if self.count > cap:
            raise MaterializationCapExceeded(self.count, cap)
        return list(self.iter_corners())


def combine_dimensions(per_dim: Sequence[CornerSet]) -> CombinedCorners:
    if not per_dim:
        raise DimensionMismatch("Need at least one dimension to combine")
    graph = per_dim[0].graph
    for k, cs in enumerate(per_dim[1:], start=2):
        if cs.graph != graph:
            raise MixedGraphs(f"Dimension {k} was solved on a different graph")
    return CombinedCorners(graph, list(per_dim))


def maximal_verifiable_components(per_dim: Sequence[CornerSet], g: MeasurementGraph) -> ComponentReport:
    """Connected pieces of the nodes that sit at zero in every corner of every dimension"""
    stable = [v for v in g.nodes if all(c.x[v - 1] == 0 for cs in per_dim for c in cs.corners)]
    induced = g.skeleton().subgraph(stable)
    components = sorted(tuple(sorted(c)) for c in nx.connected_components(induced))
    return ComponentReport(
        components=tuple(components),
        edges=tuple(g.induced_edges(c) for c in components),
    )


def edge_cost_ranges(cs: CornerSet) -> List[Tuple[Fraction, Fraction]]:
    """Per-edge (min, max) cost across the corners"""
    return [
        (min(c.edge_costs[e] for c in cs.corners), max(c.edge_costs[e] for c in cs.corners))
        for e in range(cs.graph.num_edges)
    ]


def verifiable_subproblem(inst: ProblemInstance, component: Sequence[int]) -> ProblemInstance:
    """Instance restricted to a component; its smallest node becomes node 1"""
    nodes = sorted(component)
    renumber = {v: k for k, v in enumerate(nodes, start=1)}
    kept = inst.graph.induced_edges(nodes)
    graph = MeasurementGraph(
        len(nodes), tuple((renumber[inst.graph.edges[e][0]], renumber[inst.graph.edges[e][1]]) for e in kept)
    )
    return ProblemInstance(graph, tuple(inst.epsilon[e] for e in kept))


@dataclass
class InstanceAnalysis:
    """Corner sets per dimension, their combination and the component report"""
    instance: ProblemInstance
    per_dim: List[CornerSet]
    combined: CombinedCorners
    components: ComponentReport

    @property
    def classification(self) -> Classification:
        return self.combined.classification

    def to_dict(self, materialize: bool = False, cap: Optional[int] = None) -> Dict:
        from serialization import format_rational
        data = {
            'classification': self.classification.value,
            'optimal_cost': format_rational(self.combined.optimal_cost),
            'components': self.components.to_dict(),
            'corner_count': self.combined.count,
        }
        if self.instance.d == 1:
            cs = self.per_dim[0]
            data['corners'] = [c.to_dict() for c in cs.corners]
            data['edge_cost_ranges'] = [
                [format_rational(lo), format_rational(hi)] for lo, hi in edge_cost_ranges(cs)
            ]
        else:
            data['dimensions'] = [cs.to_dict() for cs in self.per_dim]
            data['corners'] = []
            if materialize:
                data['corners'] = [
                    {'x': [[format_rational(v) for v in p] for p in emb.positions]}
                    for emb in self.combined.materialize(cap)
                ]
        return data


def analyze_instance(inst: ProblemInstance, config: Optional[VerilocalConfiguration] = None) -> InstanceAnalysis:
    """Solve every dimension, enumerate its corners and combine"""
    per_dim = []
    for k, sub in enumerate(split_dimensions(inst)):
        result = solve_instance(sub, config)
        per_dim.append(enumerate_corners(result.tableau, config))
        logger.info(f"Dimension {k + 1}: {per_dim[-1].classification.value}, {len(per_dim[-1])} corners")
    combined = combine_dimensions(per_dim)
    return InstanceAnalysis(
        instance=inst,
        per_dim=per_dim,
        combined=combined,
        components=maximal_verifiable_components(per_dim, inst.graph),
    )
