"""
Brute-force Oracle for verilocal
Exact optimum of small 1-D instances by screening every spanning-tree embedding;
shares no code with the simplex solver
"""

import logging
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from config import VerilocalConfiguration, verilocal_config
from errors import DimensionMismatch, TooLarge
from graph_core import MeasurementGraph, ProblemInstance

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TreeEmbedding:
    """Embedding that fits every edge of a spanning tree exactly, node 1 at 0"""
    tree: Tuple[int, ...]
    x: Tuple[Fraction, ...]


@dataclass(frozen=True)
class OracleResult:
    cost: Fraction
    embeddings: Tuple[Tuple[Fraction, ...], ...]
    trees_examined: int

    @property
    def origin_is_optimal(self) -> bool:
        return any(all(v == 0 for v in x) for x in self.embeddings)


def _find(parent: Dict[int, int], v: int) -> int:
    while parent[v] != v:
        v = parent[v]
    return v


def spanning_trees(g: MeasurementGraph) -> Iterator[Tuple[int, ...]]:
    """Every spanning tree as a sorted tuple of edge indices

    Branches on each edge in order: contract it when it joins two components,
    then delete it.
    """
    edges = g.edges
    m = len(edges)

    def extend(e: int, chosen: Tuple[int, ...], parent: Dict[int, int], components: int):
        if components == 1:
            yield chosen
            return
        if m - e < components - 1:
            return
        i, j = edges[e]
        root_i, root_j = _find(parent, i), _find(parent, j)
        if root_i != root_j:
            contracted = dict(parent)
            contracted[root_i] = root_j
            yield from extend(e + 1, chosen + (e,), contracted, components - 1)
        yield from extend(e + 1, chosen, parent, components)

    yield from extend(0, (), {v: v for v in g.nodes}, g.num_nodes)


def tree_embedding(inst: ProblemInstance, tree: Sequence[int]) -> TreeEmbedding:
    """Propagate positions from node 1 along the tree, fitting each edge exactly"""
    epsilon = inst.epsilon_1d
    g = inst.graph
    adjacency: Dict[int, List[Tuple[int, Fraction]]] = {v: [] for v in g.nodes}
    for e in tree:
        i, j = g.edges[e]
        adjacency[i].append((j, epsilon[e]))
        adjacency[j].append((i, -epsilon[e]))

    x: Dict[int, Fraction] = {1: Fraction(0)}
    queue = deque([1])
    while queue:
        v = queue.popleft()
        for w, offset in adjacency[v]:
            if w not in x:
                x[w] = x[v] + offset
                queue.append(w)
    if len(x) != g.num_nodes:
        raise ValueError(f"Edges {tuple(tree)} do not span the graph")
    return TreeEmbedding(tree=tuple(sorted(tree)), x=tuple(x[v] for v in g.nodes))


def l1_cost(edges: Sequence[Tuple[int, int]], epsilon: Sequence[Fraction], x: Sequence[Fraction]) -> Fraction:
    total = Fraction(0)
    for (i, j), eps in zip(edges, epsilon):
        total += abs(x[j - 1] - x[i - 1] - eps)
    return total


def oracle_solve(inst: ProblemInstance, config: Optional[VerilocalConfiguration] = None) -> OracleResult:
    """Minimum cost and all minimizing tree embeddings of a small 1-D instance"""
    config = config or verilocal_config
    if inst.d != 1:
        raise DimensionMismatch(f"Oracle solves 1-D instances, got d={inst.d}")
    g = inst.graph
    if g.num_nodes > config.oracle.max_nodes:
        raise TooLarge(f"{g.num_nodes} nodes exceed the oracle cap of {config.oracle.max_nodes}")

    epsilon = inst.epsilon_1d
    best: Optional[Fraction] = None
    minimizers = set()
    examined = 0
    for tree in spanning_trees(g):
        examined += 1
        x = tree_embedding(inst, tree).x
        cost = l1_cost(g.edges, epsilon, x)
        if best is None or cost < best:
            best, minimizers = cost, {x}
        elif cost == best:
            minimizers.add(x)

    if best is None:
        raise ValueError("Graph has no spanning tree")
    logger.debug(f"Oracle: cost {best} from {examined} trees, {len(minimizers)} optimal embeddings")
    return OracleResult(cost=best, embeddings=tuple(sorted(minimizers)), trees_examined=examined)


def oracle_ver(inst: ProblemInstance, config: Optional[VerilocalConfiguration] = None) -> int:
    """1 iff the origin's cost equals the oracle optimum"""
    origin = sum((abs(v) for v in inst.epsilon_1d), Fraction(0))
    return int(origin == oracle_solve(inst, config).cost)
