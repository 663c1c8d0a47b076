"""
Verifiability Probability Module for verilocal
Verdicts for signed outlier supports, the exact support census with its
probability polynomial, and Monte Carlo estimates for larger graphs
"""

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import norm

from config import VerilocalConfiguration, verilocal_config
from errors import BudgetExceeded, InvalidOutlierModel, ValidationError
from graph_core import MeasurementGraph, OutlierModel, SignedOutlierSupport, realize_support
from corners import Classification, classify_solution
from lp_simplex import SolveResult, resolve_instance, solve_instance

logger = logging.getLogger(__name__)

Signs = Tuple[int, ...]


@lru_cache(maxsize=256)
def _solve_support(g: MeasurementGraph, signs: Signs, config: VerilocalConfiguration):
    inst = realize_support(g, SignedOutlierSupport.from_signs(signs))
    return solve_instance(inst, config)


@lru_cache(maxsize=1 << 16)
def _verdict(g: MeasurementGraph, signs: Signs, config: VerilocalConfiguration) -> int:
    # magnitude 1 on every support edge, so the origin costs |support|
    result = _solve_support(g, signs, config)
    return int(result.cost == sum(1 for s in signs if s))


def ver(g: MeasurementGraph, support: SignedOutlierSupport, config: Optional[VerilocalConfiguration] = None) -> int:
    """1 iff the origin is optimal for the support realized at unit magnitude"""
    config = config or verilocal_config
    support.check_against(g)
    return _verdict(g, support.signs(g.num_edges), config)


def is_uniquely_verifiable(g: MeasurementGraph, support: SignedOutlierSupport,
                           config: Optional[VerilocalConfiguration] = None) -> bool:
    """True iff the origin is the only optimum"""
    config = config or verilocal_config
    support.check_against(g)
    signs = support.signs(g.num_edges)
    if not _verdict(g, signs, config):
        return False
    result = _solve_support(g, signs, config)
    return classify_solution(result, config) is Classification.UNIQUELY_VERIFIABLE


def support_probability(model: OutlierModel, support: SignedOutlierSupport) -> Fraction:
    """Probability that exactly this signed support occurs"""
    if support.entries and support.entries[-1][0] >= model.num_edges:
        raise ValidationError(f"Support references edge {support.entries[-1][0] + 1}, model has {model.num_edges}")
    signs = support.signs(model.num_edges)
    probability = Fraction(1)
    for s, p_plus, p_minus in zip(signs, model.p_plus, model.p_minus):
        if s > 0:
            probability *= p_plus
        elif s < 0:
            probability *= p_minus
        else:
            probability *= 1 - p_plus - p_minus
    return probability


def _combinations_by_cardinality(num_edges: int) -> Iterator[Tuple[int, Tuple[int, ...]]]:
    for k in range(num_edges + 1):
        for edges in itertools.combinations(range(num_edges), k):
            yield k, edges


def _supports_on(num_edges: int, edges: Tuple[int, ...], leading_positive: bool = False) -> Iterator[Signs]:
    choices = [(1,) if leading_positive and position == 0 else (1, -1) for position in range(len(edges))]
    for choice in itertools.product(*choices):
        signs = [0] * num_edges
        for e, s in zip(edges, choice):
            signs[e] = s
        yield tuple(signs)


def iter_signed_supports(num_edges: int) -> Iterator[SignedOutlierSupport]:
    """All 3^|E| signed supports, grouped by cardinality"""
    for _, edges in _combinations_by_cardinality(num_edges):
        for signs in _supports_on(num_edges, edges):
            yield SignedOutlierSupport.from_signs(signs)


@dataclass(frozen=True)
class CensusRow:
    k: int
    total: int
    verifiable: int
    uniquely_verifiable: Optional[int] = None


@dataclass
class SupportCensus:
    """Verifiable and uniquely verifiable counts per outlier cardinality"""
    num_edges: int
    rows: List[CensusRow]

    HEADER = ("k", "total", "verifiable", "uniquely_verifiable")

    @property
    def verifiable_counts(self) -> List[int]:
        return [row.verifiable for row in self.rows]

    @property
    def totals(self) -> List[int]:
        return [row.total for row in self.rows]

    def csv_rows(self) -> List[Tuple]:
        return [
            (r.k, r.total, r.verifiable, "" if r.uniquely_verifiable is None else r.uniquely_verifiable)
            for r in self.rows
        ]

    def to_dict(self) -> Dict:
        return {'rows': [dict(zip(self.HEADER, row)) for row in self.csv_rows()]}


@dataclass(frozen=True)
class PverPolynomial:
    """p_Ver(p) = sum_k coeffs[k] (p/2)^k (1-p)^(|E|-k) under the symmetric model"""
    coeffs: Tuple[int, ...]

    @property
    def num_edges(self) -> int:
        return len(self.coeffs) - 1

    def evaluate(self, p) -> Fraction:
        p = Fraction(p)
        half, rest = p / 2, 1 - p
        m = self.num_edges
        return sum((c * half ** k * rest ** (m - k) for k, c in enumerate(self.coeffs)), Fraction(0))

    def to_dict(self) -> Dict:
        return {'coeffs': list(self.coeffs)}


def p_ver_curve(poly: PverPolynomial, grid: Sequence) -> List[Tuple[Fraction, Fraction]]:
    return [(Fraction(p), poly.evaluate(p)) for p in grid]


@dataclass
class ExactResult:
    p_ver: Optional[Fraction]
    census: SupportCensus
    polynomial: PverPolynomial
    supports_evaluated: int = 0


class WarmSolver:
    """Solves supports of one graph in sequence, each from the previous optimal basis"""

    def __init__(self, g: MeasurementGraph, config: VerilocalConfiguration):
        self.g = g
        self.config = config
        self._tableau = None

    def solve(self, signs: Signs) -> SolveResult:
        inst = realize_support(self.g, SignedOutlierSupport.from_signs(signs))
        if self._tableau is None:
            result = solve_instance(inst, self.config)
        else:
            result = resolve_instance(self._tableau, inst, self.config)
        self._tableau = result.tableau
        return result


def _evaluate_chunk(g: MeasurementGraph, model: Optional[OutlierModel], items: List[Tuple[int, Tuple[int, ...]]],
                    config: VerilocalConfiguration) -> Tuple[Dict[int, List[int]], Fraction]:
    """Per-k [total, verifiable, unique] counts and the probability mass of verifiable supports

    Negating every sign negates the optimal set, so only supports whose first
    outlier is positive are solved and each verdict counts for its mirror too.
    """
    counts: Dict[int, List[int]] = {}
    mass = Fraction(0)
    with_uniqueness = config.probability.census_uniqueness
    solver = WarmSolver(g, config)
    for k, edges in items:
        row = counts.setdefault(k, [0, 0, 0])
        for signs in _supports_on(g.num_edges, edges, leading_positive=True):
            twins = (signs,) if k == 0 else (signs, tuple(-s for s in signs))
            row[0] += len(twins)
            result = solver.solve(signs)
            if result.cost != k:
                continue
            row[1] += len(twins)
            if model is not None:
                mass += sum(support_probability(model, SignedOutlierSupport.from_signs(s)) for s in twins)
            if with_uniqueness and classify_solution(result, config) is Classification.UNIQUELY_VERIFIABLE:
                row[2] += len(twins)
    return counts, mass


def _chunks(g: MeasurementGraph, chunk_size: int) -> Iterator[List[Tuple[int, Tuple[int, ...]]]]:
    chunk, weight = [], 0
    for k, edges in _combinations_by_cardinality(g.num_edges):
        chunk.append((k, edges))
        weight += 2 ** k
        if weight >= chunk_size:
            yield chunk
            chunk, weight = [], 0
    if chunk:
        yield chunk


def exact_p_ver(g: MeasurementGraph, model: Optional[OutlierModel] = None,
                config: Optional[VerilocalConfiguration] = None) -> ExactResult:
    """Enumerate every signed support; exact p_Ver, census and polynomial

    Census and polynomial do not depend on the model; without one, p_ver is None.
    """
    config = config or verilocal_config
    if model is not None and model.num_edges != g.num_edges:
        raise InvalidOutlierModel(f"Model covers {model.num_edges} edges, graph has {g.num_edges}")
    supports = 3 ** g.num_edges
    if supports > config.probability.exact_budget:
        raise BudgetExceeded(supports, config.probability.exact_budget, hint="use Monte Carlo sampling instead")

    threads = config.probability.threads
    chunks = list(_chunks(g, config.probability.chunk_size))
    logger.info(f"Enumerating {supports} signed supports in {len(chunks)} chunks on {threads} worker(s)")

    if threads == 1 or len(chunks) == 1:
        partials = [_evaluate_chunk(g, model, chunk, config) for chunk in chunks]
    else:
        with ProcessPoolExecutor(max_workers=threads) as executor:
            partials = list(executor.map(
                _evaluate_chunk,
                itertools.repeat(g), itertools.repeat(model), chunks, itertools.repeat(config),
            ))

    totals = {k: [0, 0, 0] for k in range(g.num_edges + 1)}
    p_ver = Fraction(0)
    for counts, mass in partials:
        p_ver += mass
        for k, row in counts.items():
            for position, value in enumerate(row):
                totals[k][position] += value

    with_uniqueness = config.probability.census_uniqueness
    rows = [
        CensusRow(k, row[0], row[1], row[2] if with_uniqueness else None)
        for k, row in sorted(totals.items())
    ]
    census = SupportCensus(g.num_edges, rows)
    polynomial = PverPolynomial(tuple(row.verifiable for row in rows))
    if model is None:
        p_ver = None
    else:
        logger.info(f"Exact p_Ver = {p_ver} ({float(p_ver):.6f})")
    return ExactResult(p_ver=p_ver, census=census, polynomial=polynomial, supports_evaluated=supports)


@dataclass(frozen=True)
class MonteCarloEstimate:
    estimate: float
    half_width: float
    samples: int
    hits: int
    seed: int

    def to_dict(self) -> Dict:
        return {
            'estimate': self.estimate,
            'ci95_half_width': self.half_width,
            'samples': self.samples,
            'verifiable_samples': self.hits,
            'seed': self.seed,
        }


def _sample_chunk(g: MeasurementGraph, p_plus: np.ndarray, p_minus: np.ndarray, size: int,
                  seed_sequence: np.random.SeedSequence, config: VerilocalConfiguration) -> int:
    """Verifiable draws among size supports sampled from one seed stream"""
    rng = np.random.default_rng(seed_sequence)
    u = rng.random((size, g.num_edges))
    signs = np.where(u < p_plus, 1, np.where(u < p_plus + p_minus, -1, 0))
    return sum(_verdict(g, tuple(int(s) for s in row), config) for row in signs)


def monte_carlo_p_ver(g: MeasurementGraph, model: OutlierModel, samples: int, seed: int,
                      config: Optional[VerilocalConfiguration] = None) -> MonteCarloEstimate:
    """Sample-mean estimate of p_Ver with a normal-approximation 95% interval

    Samples are split into fixed-size chunks, each with its own spawned seed
    stream, so the estimate does not depend on the worker count.
    """
    config = config or verilocal_config
    if samples < 1:
        raise ValidationError(f"Need at least one sample, got {samples}")
    if model.num_edges != g.num_edges:
        raise InvalidOutlierModel(f"Model covers {model.num_edges} edges, graph has {g.num_edges}")

    chunk_size = config.probability.chunk_size
    sizes = [chunk_size] * (samples // chunk_size)
    if samples % chunk_size:
        sizes.append(samples % chunk_size)
    streams = np.random.SeedSequence(seed).spawn(len(sizes))
    p_plus = np.array([float(p) for p in model.p_plus])
    p_minus = np.array([float(p) for p in model.p_minus])

    threads = config.probability.threads
    if threads == 1 or len(sizes) == 1:
        hits = sum(_sample_chunk(g, p_plus, p_minus, size, stream, config) for size, stream in zip(sizes, streams))
    else:
        with ProcessPoolExecutor(max_workers=threads) as executor:
            hits = sum(executor.map(
                _sample_chunk,
                itertools.repeat(g), itertools.repeat(p_plus), itertools.repeat(p_minus),
                sizes, streams, itertools.repeat(config),
            ))

    estimate = hits / samples
    half_width = float(norm.ppf(0.975) * math.sqrt(estimate * (1 - estimate) / samples))
    logger.info(f"Monte Carlo p_Ver = {estimate:.6f} +- {half_width:.6f} over {samples} samples")
    return MonteCarloEstimate(estimate=estimate, half_width=half_width, samples=samples, hits=hits, seed=seed)
