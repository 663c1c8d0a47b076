"""
Serialization helpers for verilocal
Rational formatting and parsing, JSON schemas, and file loaders
"""

import csv
import io
import json
import logging
from fractions import Fraction
from typing import Any, Dict, Optional, Sequence, Tuple

import jsonschema

from errors import InputParseError
from graph_core import MeasurementGraph, ProblemInstance, SignedOutlierSupport, Sign

logger = logging.getLogger(__name__)

RATIONAL_PATTERN = r"^-?[0-9]+(/[0-9]+)?$|^-?[0-9]*\.[0-9]+$"

RATIONAL_SCHEMA = {
    "oneOf": [
        {"type": "integer"},
        {"type": "string", "pattern": RATIONAL_PATTERN},
    ]
}

EPSILON_ROWS_SCHEMA = {
    "type": "array",
    "items": {"type": "array", "minItems": 1, "items": RATIONAL_SCHEMA},
}

GRAPH_SCHEMA = {
    "type": "object",
    "required": ["num_nodes", "edges"],
    "properties": {
        "num_nodes": {"type": "integer", "minimum": 1},
        "edges": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["i", "j"],
                "properties": {"i": {"type": "integer"}, "j": {"type": "integer"}},
            },
        },
        "epsilon": EPSILON_ROWS_SCHEMA,
    },
}

EPSILON_SCHEMA = {
    "type": "object",
    "required": ["epsilon"],
    "properties": {"epsilon": EPSILON_ROWS_SCHEMA},
}

SUPPORT_SCHEMA = {
    "type": "object",
    "required": ["support"],
    "properties": {
        "support": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["edge", "sign"],
                "properties": {
                    "edge": {"type": "integer", "minimum": 1},
                    "sign": {"enum": ["+", "-"]},
                },
            },
        },
    },
}

CORNER_REPORT_SCHEMA = {
    "type": "object",
    "required": ["classification", "optimal_cost", "corners", "components"],
    "properties": {
        "classification": {"enum": ["UniquelyVerifiable", "Verifiable", "NonVerifiable"]},
        "optimal_cost": {"type": "string", "pattern": r"^-?[0-9]+/[0-9]+$"},
        "corners": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["x"],
                "properties": {
                    "x": {
                        "type": "array",
                        "items": {
                            "oneOf": [
                                {"type": "string"},
                                {"type": "array", "items": {"type": "string"}},
                            ]
                        },
                    },
                    "edge_costs": {"type": "array", "items": {"type": "string"}},
                },
            },
        },
        "components": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
    },
}

POLYNOMIAL_SCHEMA = {
    "type": "object",
    "required": ["coeffs"],
    "properties": {"coeffs": {"type": "array", "items": {"type": "integer", "minimum": 0}}},
}


def format_rational(value) -> str:
    """Exact "num/den" form; integers keep an explicit /1"""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def parse_rational(value) -> Fraction:
    """Accept "num/den", integer or decimal strings, and JSON integers"""
    if isinstance(value, bool):
        raise InputParseError(f"Not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            result = Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise InputParseError(f"Not a rational: {value!r} ({e})")
        return result
    raise InputParseError(f"Not a rational: {value!r}")


def _validate(data: Any, schema: Dict, what: str) -> None:
    try:
        jsonschema.validate(instance=data, schema=schema)
    except jsonschema.ValidationError as e:
        path = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise InputParseError(f"Invalid {what} at {path}: {e.message}")


def read_json(path: str) -> Any:
    """Read a JSON file, mapping I/O and syntax failures to InputParseError"""
    try:
        with open(path, 'r') as f:
            return json.load(f)
    except OSError as e:
        raise InputParseError(f"Cannot read {path}: {e}")
    except json.JSONDecodeError as e:
        raise InputParseError(f"{path} is not valid JSON: {e}")


def graph_from_dict(data: Dict) -> MeasurementGraph:
    _validate(data, GRAPH_SCHEMA, "graph")
    return MeasurementGraph(data["num_nodes"], tuple((edge["i"], edge["j"]) for edge in data["edges"]))


def epsilon_from_dict(data: Dict, graph: MeasurementGraph) -> Optional[ProblemInstance]:
    """Instance from the optional epsilon block, None if absent"""
    if "epsilon" not in data:
        return None
    _validate(data, EPSILON_SCHEMA, "epsilon block")
    rows = tuple(tuple(parse_rational(v) for v in row) for row in data["epsilon"])
    return ProblemInstance(graph, rows)


def support_from_dict(data: Dict) -> SignedOutlierSupport:
    _validate(data, SUPPORT_SCHEMA, "support")
    return SignedOutlierSupport(tuple((entry["edge"] - 1, Sign(entry["sign"])) for entry in data["support"]))


def load_graph(path: str) -> Tuple[MeasurementGraph, Optional[ProblemInstance]]:
    """Graph file, with its epsilon block as an instance when present"""
    data = read_json(path)
    graph = graph_from_dict(data)
    return graph, epsilon_from_dict(data, graph)


def load_support(path: str) -> SignedOutlierSupport:
    return support_from_dict(read_json(path))


def load_epsilon(path: str, graph: MeasurementGraph) -> ProblemInstance:
    """Instance from a file holding an epsilon block for the given graph"""
    data = read_json(path)
    _validate(data, EPSILON_SCHEMA, "epsilon file")
    return epsilon_from_dict(data, graph)


def dump_json(data: Any) -> str:
    """Deterministic JSON text"""
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def validate_corner_report(data: Dict) -> None:
    _validate(data, CORNER_REPORT_SCHEMA, "corner report")


def write_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def format_decimal(value, digits: int = 12) -> str:
    """Rounded decimal for plot-oriented CSV output"""
    value = Fraction(value)
    return f"{float(value):.{digits}g}" if value else "0"
