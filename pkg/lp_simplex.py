"""
LP Simplex Module for verilocal
Standard-form LP of a 1-D localization instance and its exact dual simplex
solution, with primal and dual readout
"""

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Set, Tuple

from config import VerilocalConfiguration, verilocal_config
from errors import CycleDetected, InternalUnbounded, MixedGraphs, NotOptimal
from graph_core import MeasurementGraph, ProblemInstance

logger = logging.getLogger(__name__)
trace_logger = logging.getLogger(f"{__name__}.trace")

ZERO = Fraction(0)
ONE = Fraction(1)


class ColumnKind(Enum):
    """Variable families of the standard-form LP"""
    X_PLUS = "x+"
    X_MINUS = "x-"
    Z = "Z"
    S_PLUS = "S+"
    S_MINUS = "S-"


@dataclass(frozen=True)
class ColumnLabel:
    """Column tag; index is a node id for x columns, a 1-based edge number otherwise"""
    kind: ColumnKind
    index: int

    def __str__(self):
        return f"{self.kind.value}_{self.index}"


@dataclass(frozen=True)
class StandardLP:
    """min c'q  s.t.  Aq = b, q >= 0, with node 1's columns removed"""
    graph: MeasurementGraph
    epsilon: Tuple[Fraction, ...]
    cost: Tuple[Fraction, ...]
    constraint_matrix: Tuple[Tuple[Fraction, ...], ...]
    rhs: Tuple[Fraction, ...]
    column_labels: Tuple[ColumnLabel, ...]

    @property
    def num_rows(self) -> int:
        return len(self.rhs)

    @property
    def num_columns(self) -> int:
        return len(self.cost)

    def column_index(self, kind: ColumnKind, index: int) -> int:
        """Position of a labelled column"""
        n, m = self.graph.num_nodes, self.graph.num_edges
        if kind in (ColumnKind.X_PLUS, ColumnKind.X_MINUS):
            if not 2 <= index <= n:
                raise KeyError(f"No {kind.value} column for node {index}")
            offset = 0 if kind is ColumnKind.X_PLUS else n - 1
            return offset + index - 2
        if not 1 <= index <= m:
            raise KeyError(f"No {kind.value} column for edge {index}")
        block = {ColumnKind.Z: 0, ColumnKind.S_PLUS: 1, ColumnKind.S_MINUS: 2}[kind]
        return 2 * (n - 1) + block * m + index - 1


def build_lp(inst: ProblemInstance) -> StandardLP:
    """Rows e and m+e encode the two slack equations of edge e"""
    epsilon = inst.epsilon_1d
    g = inst.graph
    n, m = g.num_nodes, g.num_edges

    labels = (
        [ColumnLabel(ColumnKind.X_PLUS, v) for v in range(2, n + 1)]
        + [ColumnLabel(ColumnKind.X_MINUS, v) for v in range(2, n + 1)]
        + [ColumnLabel(ColumnKind.Z, e) for e in range(1, m + 1)]
        + [ColumnLabel(ColumnKind.S_PLUS, e) for e in range(1, m + 1)]
        + [ColumnLabel(ColumnKind.S_MINUS, e) for e in range(1, m + 1)]
    )
    num_columns = len(labels)
    cost = tuple(ONE if label.kind is ColumnKind.Z else ZERO for label in labels)

    def x_columns(node: int) -> Tuple[Optional[int], Optional[int]]:
        if node == 1:
            return None, None
        return node - 2, n - 1 + node - 2

    matrix = [[ZERO] * num_columns for _ in range(2 * m)]
    for e, (i, j) in enumerate(g.edges):
        upper, lower = matrix[e], matrix[m + e]
        # x_j - x_i - Z + S+ = eps ;  -(x_j - x_i) - Z + S- = -eps
        for node, sign in ((j, 1), (i, -1)):
            plus, minus = x_columns(node)
            if plus is None:
                continue
            upper[plus] += sign
            upper[minus] -= sign
            lower[plus] -= sign
            lower[minus] += sign
        z = 2 * (n - 1) + e
        upper[z] = -ONE
        lower[z] = -ONE
        upper[2 * (n - 1) + m + e] = ONE
        lower[2 * (n - 1) + 2 * m + e] = ONE

    rhs = tuple(epsilon) + tuple(-v for v in epsilon)
    return StandardLP(
        graph=g,
        epsilon=tuple(epsilon),
        cost=cost,
        constraint_matrix=tuple(tuple(row) for row in matrix),
        rhs=rhs,
        column_labels=tuple(labels),
    )


class Tableau:
    """Dual simplex working state with sparse exact rows

    rows[r] maps column -> coefficient (zeros omitted); basic_values is the
    zeroth column; reduced_costs is the zeroth row.
    """

    def __init__(self, lp: StandardLP, rows: List[Dict[int, Fraction]], basis: List[int],
                 basic_values: List[Fraction], reduced_costs: List[Fraction], objective_value: Fraction):
        self.lp = lp
        self.rows = rows
        self.basis = basis
        self.basic_values = basic_values
        self.reduced_costs = reduced_costs
        self.objective_value = objective_value
        self.pivot_count = 0

    def copy(self) -> 'Tableau':
        clone = Tableau(
            self.lp,
            [dict(row) for row in self.rows],
            list(self.basis),
            list(self.basic_values),
            list(self.reduced_costs),
            self.objective_value,
        )
        clone.pivot_count = self.pivot_count
        return clone

    @property
    def basis_key(self) -> Tuple[int, ...]:
        return tuple(sorted(self.basis))

    def is_primal_feasible(self) -> bool:
        return all(v >= 0 for v in self.basic_values)

    def is_dual_feasible(self) -> bool:
        return all(c >= 0 for c in self.reduced_costs)

    def is_optimal(self) -> bool:
        return self.is_primal_feasible() and self.is_dual_feasible()

    def entry(self, row: int, column: int) -> Fraction:
        return self.rows[row].get(column, ZERO)

    def column(self, column: int) -> List[Tuple[int, Fraction]]:
        """Nonzero (row, coefficient) pairs of a column"""
        return [(r, row[column]) for r, row in enumerate(self.rows) if column in row]

    def values(self) -> List[Fraction]:
        """Full variable vector of the current basic solution"""
        q = [ZERO] * self.lp.num_columns
        for r, column in enumerate(self.basis):
            q[column] = self.basic_values[r]
        return q

    def pivot(self, row: int, column: int) -> None:
        """Make column basic in row; exact Gauss-Jordan step"""
        pivot_row = self.rows[row]
        element = pivot_row[column]
        normalized = {c: v / element for c, v in pivot_row.items()}
        value = self.basic_values[row] / element
        self.rows[row] = normalized
        self.basic_values[row] = value

        for r, other in enumerate(self.rows):
            if r == row:
                continue
            factor = other.get(column)
            if not factor:
                continue
            for c, v in normalized.items():
                updated = other.get(c, ZERO) - factor * v
                if updated:
                    other[c] = updated
                else:
                    other.pop(c, None)
            self.basic_values[r] -= factor * value

        factor = self.reduced_costs[column]
        if factor:
            for c, v in normalized.items():
                self.reduced_costs[c] -= factor * v
            self.objective_value += factor * value
        self.basis[row] = column
        self.pivot_count += 1

    def __repr__(self):
        return f'<Tableau rows={len(self.rows)} obj={self.objective_value} pivots={self.pivot_count}>'


def initial_tableau(lp: StandardLP) -> Tableau:
    """Slack columns form the starting basis; reduced costs start at c"""
    m = lp.graph.num_edges
    rows = [{c: v for c, v in enumerate(row) if v} for row in lp.constraint_matrix]
    s_plus = [lp.column_index(ColumnKind.S_PLUS, e) for e in range(1, m + 1)]
    s_minus = [lp.column_index(ColumnKind.S_MINUS, e) for e in range(1, m + 1)]
    return Tableau(
        lp=lp,
        rows=rows,
        basis=s_plus + s_minus,
        basic_values=list(lp.rhs),
        reduced_costs=list(lp.cost),
        objective_value=ZERO,
    )


@dataclass(frozen=True)
class PrimalSolution:
    """Optimal primal point; x[0] is the gauge node"""
    x: Tuple[Fraction, ...]
    Z: Tuple[Fraction, ...]
    S_plus: Tuple[Fraction, ...]
    S_minus: Tuple[Fraction, ...]
    cost: Fraction

    def to_dict(self) -> Dict:
        from serialization import format_rational
        return {
            'x': [format_rational(v) for v in self.x],
            'edge_costs': [format_rational(v) for v in self.Z],
            'S_plus': [format_rational(v) for v in self.S_plus],
            'S_minus': [format_rational(v) for v in self.S_minus],
            'cost': format_rational(self.cost),
        }


@dataclass(frozen=True)
class DualCertificate:
    """Dual multipliers of the two constraint rows of every edge"""
    P_plus: Tuple[Fraction, ...]
    P_minus: Tuple[Fraction, ...]
    dual_value: Fraction

    def to_dict(self) -> Dict:
        from serialization import format_rational
        return {
            'P_plus': [format_rational(v) for v in self.P_plus],
            'P_minus': [format_rational(v) for v in self.P_minus],
            'dual_value': format_rational(self.dual_value),
        }


def _choose_pivot_row(t: Tableau, bland: bool) -> Optional[int]:
    """Most negative basic value, lowest row on ties; Bland mode picks the lowest basic column"""
    best = None
    for r, value in enumerate(t.basic_values):
        if value >= 0:
            continue
        if best is None:
            best = r
        elif bland:
            if t.basis[r] < t.basis[best]:
                best = r
        elif value < t.basic_values[best]:
            best = r
    return best


def _choose_pivot_column(t: Tableau, row: int) -> Optional[int]:
    """Minimal c_j/|r_j| over r_j < 0, lowest column on ties"""
    best, best_ratio = None, None
    for column, coefficient in t.rows[row].items():
        if coefficient >= 0:
            continue
        ratio = t.reduced_costs[column] / -coefficient
        if best is None or ratio < best_ratio or (ratio == best_ratio and column < best):
            best, best_ratio = column, ratio
    return best


def _trace(t: Tableau, row: int, column: int, config: VerilocalConfiguration) -> None:
    if config.solver.trace:
        from serialization import format_rational
        trace_logger.info(
            f"pivot row={row} col={t.lp.column_labels[column]} obj={format_rational(t.objective_value)}"
        )


def extract_primal(t: Tableau) -> PrimalSolution:
    """Read the basic solution as an embedding plus edge costs"""
    lp = t.lp
    g = lp.graph
    q = t.values()
    x = [ZERO]
    for node in range(2, g.num_nodes + 1):
        x.append(q[lp.column_index(ColumnKind.X_PLUS, node)] - q[lp.column_index(ColumnKind.X_MINUS, node)])
    edges = range(1, g.num_edges + 1)
    z = tuple(q[lp.column_index(ColumnKind.Z, e)] for e in edges)
    return PrimalSolution(
        x=tuple(x),
        Z=z,
        S_plus=tuple(q[lp.column_index(ColumnKind.S_PLUS, e)] for e in edges),
        S_minus=tuple(q[lp.column_index(ColumnKind.S_MINUS, e)] for e in edges),
        cost=sum(z, ZERO),
    )


def dual_simplex_solve(t: Tableau, config: Optional[VerilocalConfiguration] = None) -> Tuple[Tableau, PrimalSolution]:
    """Pivot t in place to optimality; returns it with the optimal primal point"""
    config = config or verilocal_config
    if not t.is_dual_feasible():
        raise NotOptimal("Dual simplex needs nonnegative reduced costs to start")

    seen: Set[Tuple[int, ...]] = {t.basis_key}
    bland = False
    while True:
        row = _choose_pivot_row(t, bland)
        if row is None:
            break
        column = _choose_pivot_column(t, row)
        if column is None:
            raise InternalUnbounded(
                f"Row {row} has no negative entry; the localization LP is always feasible, "
                f"so this indicates a construction bug"
            )
        if t.pivot_count >= config.solver.max_pivots:
            raise CycleDetected(f"No optimum after {t.pivot_count} pivots")

        t.pivot(row, column)
        _trace(t, row, column, config)

        key = t.basis_key
        if key in seen and not bland:
            logger.debug(f"Basis repeated after {t.pivot_count} pivots, switching to Bland's rule")
            bland = True
        seen.add(key)

    primal = extract_primal(t)
    logger.debug(f"Dual simplex finished: cost {primal.cost} after {t.pivot_count} pivots")
    return t, primal


def extract_dual_certificate(t: Tableau) -> DualCertificate:
    """Duals are minus the reduced costs of the slack columns"""
    if not t.is_optimal():
        raise NotOptimal("Dual certificate requires a tableau at dual simplex termination")
    lp = t.lp
    edges = range(1, lp.graph.num_edges + 1)
    p_plus = tuple(-t.reduced_costs[lp.column_index(ColumnKind.S_PLUS, e)] for e in edges)
    p_minus = tuple(-t.reduced_costs[lp.column_index(ColumnKind.S_MINUS, e)] for e in edges)
    value = sum((eps * (pp - pm) for eps, pp, pm in zip(lp.epsilon, p_plus, p_minus)), ZERO)
    return DualCertificate(P_plus=p_plus, P_minus=p_minus, dual_value=value)


@dataclass
class SolveResult:
    """Everything one solve produces"""
    tableau: Tableau
    primal: PrimalSolution
    dual: DualCertificate

    @property
    def cost(self) -> Fraction:
        return self.primal.cost


def solve_instance(inst: ProblemInstance, config: Optional[VerilocalConfiguration] = None) -> SolveResult:
    """build_lp -> initial_tableau -> dual_simplex_solve -> dual certificate"""
    tableau, primal = dual_simplex_solve(initial_tableau(build_lp(inst)), config)
    return SolveResult(tableau=tableau, primal=primal, dual=extract_dual_certificate(tableau))


def resolve_instance(t: Tableau, inst: ProblemInstance, config: Optional[VerilocalConfiguration] = None) -> SolveResult:
    """Solve inst starting from an optimal basis of another instance on the same graph

    Reduced costs do not depend on epsilon, so the old basis is still dual
    feasible. Basic values are recomputed as B^-1 b, read from the slack
    columns, and the dual simplex resumes from there. t is left untouched.
    """
    lp = build_lp(inst)
    if lp.graph != t.lp.graph:
        raise MixedGraphs("Warm start needs an optimal basis of the same graph")
    if not t.is_dual_feasible():
        raise NotOptimal("Warm start needs a dual feasible basis")

    m = lp.graph.num_edges
    inverse = (
        [lp.column_index(ColumnKind.S_PLUS, e) for e in range(1, m + 1)]
        + [lp.column_index(ColumnKind.S_MINUS, e) for e in range(1, m + 1)]
    )
    work = t.copy()
    work.lp = lp
    work.basic_values = [
        sum((row.get(column, ZERO) * b for column, b in zip(inverse, lp.rhs)), ZERO) for row in work.rows
    ]
    work.objective_value = sum((lp.cost[c] * v for c, v in zip(work.basis, work.basic_values)), ZERO)
    work.pivot_count = 0

    tableau, primal = dual_simplex_solve(work, config)
    return SolveResult(tableau=tableau, primal=primal, dual=extract_dual_certificate(tableau))


def optimal_face_extent(t: Tableau, node: int, config: Optional[VerilocalConfiguration] = None) -> Tuple[Fraction, Fraction]:
    """Exact (min, max) of x_node over the optimal set

    Runs a primal simplex with Bland's rule on copies of the optimal tableau,
    entering only zero-reduced-cost columns so every visited basis stays optimal.
    """
    config = config or verilocal_config
    if not t.is_optimal():
        raise NotOptimal("Extent of the optimal set needs an optimal tableau")
    if node == 1:
        return ZERO, ZERO
    lp = t.lp
    plus = lp.column_index(ColumnKind.X_PLUS, node)
    minus = lp.column_index(ColumnKind.X_MINUS, node)
    low = _optimize_over_face(t, {plus: ONE, minus: -ONE}, config)
    high = -_optimize_over_face(t, {plus: -ONE, minus: ONE}, config)
    return low, high


def _optimize_over_face(t: Tableau, weights: Dict[int, Fraction], config: VerilocalConfiguration) -> Fraction:
    """Minimum of a secondary linear objective over the optimal face"""
    work = t.copy()
    allowed = {c for c, cost in enumerate(work.reduced_costs) if cost == 0}

    secondary = [weights.get(c, ZERO) for c in range(work.lp.num_columns)]
    value = ZERO
    for r, column in enumerate(work.basis):
        w = weights.get(column)
        if not w:
            continue
        value += w * work.basic_values[r]
        for c, v in work.rows[r].items():
            secondary[c] -= w * v

    for _ in range(config.solver.max_pivots):
        basic = set(work.basis)
        entering = next((c for c in sorted(allowed) if c not in basic and secondary[c] < 0), None)
        if entering is None:
            return value
        leaving, best_ratio = None, None
        for r, coefficient in work.column(entering):
            if coefficient <= 0:
                continue
            ratio = work.basic_values[r] / coefficient
            if (leaving is None or ratio < best_ratio
                    or (ratio == best_ratio and work.basis[r] < work.basis[leaving])):
                leaving, best_ratio = r, ratio
        if leaving is None:
            raise InternalUnbounded("Optimal set is unbounded along a coordinate; it must be compact")

        factor = secondary[entering]
        row_before = work.rows[leaving]
        element = row_before[entering]
        step = work.basic_values[leaving] / element
        for c, v in row_before.items():
            secondary[c] -= factor * v / element
        value += factor * step
        work.pivot(leaving, entering)
    raise CycleDetected(f"Secondary optimization did not finish in {config.solver.max_pivots} pivots")
