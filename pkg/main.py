"""
verilocal command line
Check outlier supports, enumerate optimal corners, compute verifiability
probabilities and sample random instances
"""

import argparse
import logging
import sys
from fractions import Fraction
from typing import List, Optional, Sequence

from config import VerilocalConfiguration
from corners import Classification, analyze_instance, classify_solution, enumerate_corners
from errors import InputParseError, ValidationError, VerilocalError
from graph_core import OutlierModel, ProblemInstance, realize_support, sample_outliers, split_dimensions, validate_graph
from lp_simplex import solve_instance
from oracle import oracle_solve
from report import RunReport
from serialization import (
    dump_json,
    format_decimal,
    format_rational,
    load_epsilon,
    load_graph,
    load_support,
    parse_rational,
    validate_corner_report,
    write_csv,
)
from verifiability import exact_p_ver, monte_carlo_p_ver, p_ver_curve

logger = logging.getLogger(__name__)


def parse_grid(text: str) -> List[Fraction]:
    """pmin:pmax:steps, inclusive of both ends"""
    parts = text.split(':')
    if len(parts) != 3:
        raise InputParseError(f"Grid must look like pmin:pmax:steps, got {text!r}")
    low, high = parse_rational(parts[0]), parse_rational(parts[1])
    try:
        steps = int(parts[2])
    except ValueError:
        raise InputParseError(f"Grid step count must be an integer, got {parts[2]!r}")
    if steps < 1:
        raise ValidationError(f"Grid needs at least one point, got {steps}")
    if not 0 <= low <= high <= 1:
        raise ValidationError(f"Grid must satisfy 0 <= pmin <= pmax <= 1, got {low}..{high}")
    if steps == 1:
        return [low]
    return [low + (high - low) * Fraction(i, steps - 1) for i in range(steps)]


def _load_problem(args, report: RunReport) -> ProblemInstance:
    """Graph plus outliers from --support, --epsilon or the graph file itself"""
    graph, embedded = load_graph(args.graph)
    report.add_input('graph', args.graph)
    validate_graph(graph)
    if args.support:
        support = load_support(args.support)
        report.add_input('support', args.support)
        support.check_against(graph)
        return realize_support(graph, support)
    if args.epsilon:
        report.add_input('epsilon', args.epsilon)
        return load_epsilon(args.epsilon, graph)
    if embedded is None:
        raise ValidationError("No outliers given: pass --support or --epsilon, or add an epsilon block to the graph file")
    return embedded


def cmd_check(args, config: VerilocalConfiguration) -> RunReport:
    report = RunReport(command='check', arguments={'oracle': args.oracle, 'corners': args.corners})
    report.start_execution()
    inst = _load_problem(args, report)

    dimensions = []
    classes = []
    for k, sub in enumerate(split_dimensions(inst)):
        result = solve_instance(sub, config)
        classification = classify_solution(result, config)
        classes.append(classification)
        entry = {
            'classification': classification.value,
            'optimal_cost': format_rational(result.cost),
            'origin_cost': format_rational(sub.objective_at_origin()),
            'solution': {
                'x': [format_rational(v) for v in result.primal.x],
                'edge_costs': [format_rational(v) for v in result.primal.Z],
            },
            'dual': result.dual.to_dict(),
        }
        if args.corners:
            entry['corners'] = [c.to_dict() for c in enumerate_corners(result.tableau, config).corners]
        if args.oracle:
            checked = oracle_solve(sub, config)
            entry['oracle'] = {
                'optimal_cost': format_rational(checked.cost),
                'agrees': checked.cost == result.cost,
            }
            if checked.cost != result.cost:
                logger.error(f"Dimension {k + 1}: oracle cost {checked.cost} differs from solver cost {result.cost}")
        dimensions.append(entry)

    if all(c is Classification.UNIQUELY_VERIFIABLE for c in classes):
        overall = Classification.UNIQUELY_VERIFIABLE
    elif all(c.is_verifiable for c in classes):
        overall = Classification.VERIFIABLE
    else:
        overall = Classification.NON_VERIFIABLE
    report.payload = {
        'classification': overall.value,
        'optimal_cost': format_rational(sum((parse_rational(d['optimal_cost']) for d in dimensions), Fraction(0))),
        'dimensions': dimensions,
    }
    return report


def cmd_corners(args, config: VerilocalConfiguration) -> RunReport:
    report = RunReport(command='corners', arguments={'dims': args.dims, 'materialize': args.materialize})
    report.start_execution()
    inst = _load_problem(args, report)
    if args.dims is not None and args.dims != inst.d:
        raise ValidationError(f"--dims {args.dims} given, outliers have {inst.d} dimensions")

    analysis = analyze_instance(inst, config)
    payload = analysis.to_dict(materialize=args.materialize, cap=config.enumeration.materialization_cap)
    validate_corner_report(payload)
    report.payload = payload
    return report


def _write_text(path: Optional[str], text: str) -> None:
    if path:
        with open(path, 'w') as f:
            f.write(text)
        logger.info(f"Wrote {path}")


def _model(args, num_edges: int) -> Optional[OutlierModel]:
    if args.p_plus is None and args.p_minus is None:
        return None
    if args.p_plus is None or args.p_minus is None:
        raise ValidationError("--p-plus and --p-minus must be given together")
    return OutlierModel.homogeneous(num_edges, parse_rational(args.p_plus), parse_rational(args.p_minus))


def cmd_pver(args, config: VerilocalConfiguration) -> RunReport:
    report = RunReport(command='pver', arguments={
        'p_plus': args.p_plus, 'p_minus': args.p_minus, 'grid': args.grid, 'samples': args.samples,
    })
    report.start_execution()
    graph, _ = load_graph(args.graph)
    report.add_input('graph', args.graph)
    validate_graph(graph)
    model = _model(args, graph.num_edges)
    grid = parse_grid(args.grid) if args.grid else []

    if args.samples is None:
        result = exact_p_ver(graph, model, config)
        curve = p_ver_curve(result.polynomial, grid)
        report.payload = {
            'mode': 'exact',
            'census': result.census.to_dict()['rows'],
            'polynomial': result.polynomial.to_dict(),
            'curve': [{'p': format_rational(p), 'p_ver': format_rational(v)} for p, v in curve],
        }
        if result.p_ver is not None:
            report.payload['p_ver'] = format_rational(result.p_ver)
            report.payload['model_is_symmetric'] = model.is_symmetric
        _write_text(args.census_csv, write_csv(result.census.HEADER, result.census.csv_rows()))
        _write_text(args.polynomial_json, dump_json(result.polynomial.to_dict()))
        _write_text(args.curve_csv, write_csv(
            ('p', 'p_ver'), [(format_decimal(p), format_decimal(v)) for p, v in curve]
        ))
        return report

    if model is None and not grid:
        raise ValidationError("Monte Carlo mode needs --p-plus and --p-minus, or --grid")
    outside = [p for p in grid if not 0 < p < 1]
    if outside:
        raise ValidationError(f"Monte Carlo grid points must lie strictly between 0 and 1, got {outside[0]}")
    report.seed = args.seed
    report.payload = {'mode': 'monte_carlo'}
    if model is not None:
        report.payload['estimate'] = monte_carlo_p_ver(graph, model, args.samples, args.seed, config).to_dict()
    points = []
    for p in grid:
        estimate = monte_carlo_p_ver(graph, OutlierModel.symmetric(graph.num_edges, p), args.samples, args.seed, config)
        points.append((p, estimate))
    report.payload['curve'] = [dict(p=format_rational(p), **estimate.to_dict()) for p, estimate in points]
    _write_text(args.curve_csv, write_csv(
        ('p', 'p_ver', 'ci95_half_width'),
        [(format_decimal(p), format_decimal(e.estimate), format_decimal(e.half_width)) for p, e in points],
    ))
    return report


def cmd_sample(args, config: VerilocalConfiguration) -> str:
    graph, _ = load_graph(args.graph)
    validate_graph(graph)
    model = _model(args, graph.num_edges)
    if model is None:
        raise ValidationError("sample needs --p-plus and --p-minus")
    inst = sample_outliers(graph, model, args.dims, args.seed, config)
    return dump_json(inst.to_dict())


def _add_outlier_source(parser: argparse.ArgumentParser):
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--support", help="Signed outlier support file (1-based edge numbers)")
    source.add_argument("--epsilon", help="File with an epsilon block of per-edge outliers")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="verilocal", description="Verifiability of l1 localization under outliers")
    parser.add_argument("--config", help="Configuration JSON file")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    parser.add_argument("--trace", action="store_true", help="Log every simplex pivot")
    parser.add_argument("--output", "-o", help="Write the JSON report here instead of stdout")
    parser.add_argument("--timing", action="store_true", help="Include wall-clock timing in the report")
    commands = parser.add_subparsers(dest="command", required=True)

    check = commands.add_parser("check", help="Classify one instance")
    check.add_argument("graph", help="Graph JSON file")
    _add_outlier_source(check)
    check.add_argument("--oracle", action="store_true", help="Cross-check the optimum by brute force")
    check.add_argument("--corners", action="store_true", help="List every optimal corner")

    corners = commands.add_parser("corners", help="Enumerate corners and maximal verifiable components")
    corners.add_argument("graph", help="Graph JSON file")
    _add_outlier_source(corners)
    corners.add_argument("--dims", type=int, help="Expected outlier dimension")
    corners.add_argument("--materialize", action="store_true", help="List combined d-dimensional corners")

    pver = commands.add_parser("pver", help="Verifiability probability")
    pver.add_argument("graph", help="Graph JSON file")
    pver.add_argument("--p-plus", help="Probability of a positive outlier per edge")
    pver.add_argument("--p-minus", help="Probability of a negative outlier per edge")
    mode = pver.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="Enumerate every signed support (default)")
    mode.add_argument("--samples", type=int, help="Monte Carlo sample count")
    pver.add_argument("--seed", type=int, default=0, help="Monte Carlo seed")
    pver.add_argument("--grid", help="pmin:pmax:steps for the symmetric p_Ver curve")
    pver.add_argument("--census-csv", help="Write the support census here")
    pver.add_argument("--curve-csv", help="Write the p_Ver curve here")
    pver.add_argument("--polynomial-json", help="Write the polynomial coefficients here")

    sample = commands.add_parser("sample", help="Draw random outliers for a graph")
    sample.add_argument("graph", help="Graph JSON file")
    sample.add_argument("--p-plus", required=True)
    sample.add_argument("--p-minus", required=True)
    sample.add_argument("--dims", type=int, default=1)
    sample.add_argument("--seed", type=int, default=0)
    return parser


COMMANDS = {
    'check': cmd_check,
    'corners': cmd_corners,
    'pver': cmd_pver,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command; returns the process exit code"""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )

    try:
        config = VerilocalConfiguration(config_file=args.config)
        if args.trace:
            config.solver.trace = True

        if args.command == 'sample':
            text = cmd_sample(args, config)
            if args.output:
                _write_text(args.output, text)
            else:
                sys.stdout.write(text)
            return 0

        report = COMMANDS[args.command](args, config)
        report.end_execution()
        report.include_timing = args.timing
        text = report.write(args.output)
        if not args.output:
            sys.stdout.write(text)
        return 0
    except VerilocalError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected failure: {e}")
        return 4


if __name__ == "__main__":
    sys.exit(main())
