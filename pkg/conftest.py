"""
Main pytest configuration and fixtures for verilocal testing
Provides shared fixtures, hypothesis profiles and file helpers
"""

import json
import os
from typing import Any, Callable

import pytest
from hypothesis import HealthCheck, settings

from config import VerilocalConfiguration
from reference_cases import (
    complete_graph,
    instance,
    opposite_pair_graph,
    triangle_graph,
    triangle_with_pendant_graph,
    two_node_graph,
)

settings.register_profile(
    "verilocal",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.register_profile("dev", deadline=None, max_examples=20)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "verilocal"))


# ============================================================================
# Configuration fixtures
# ============================================================================

@pytest.fixture
def config(tmp_path) -> VerilocalConfiguration:
    """Defaults only, single worker, no environment overrides"""
    cfg = VerilocalConfiguration(config_file=str(tmp_path / "absent.json"), use_environment=False)
    cfg.probability.threads = 1
    return cfg


@pytest.fixture
def clean_env(monkeypatch):
    """Remove every VERILOCAL_ variable for the duration of a test"""
    for name in list(os.environ):
        if name.startswith("VERILOCAL_"):
            monkeypatch.delenv(name, raising=False)
    return monkeypatch


# ============================================================================
# Graph and instance fixtures
# ============================================================================

@pytest.fixture
def k5():
    return complete_graph(5)


@pytest.fixture
def k4():
    return complete_graph(4)


@pytest.fixture
def two_nodes():
    return two_node_graph()


@pytest.fixture
def triangle():
    return triangle_graph()


@pytest.fixture
def triangle_pendant():
    return triangle_with_pendant_graph()


@pytest.fixture
def opposite_pair():
    return opposite_pair_graph()


@pytest.fixture
def triangle_instance(triangle):
    """Unit outlier on the edge (1,3)"""
    return instance(triangle, [0, 0, 1])


@pytest.fixture
def pendant_instance(triangle_pendant):
    """Clean triangle, unit outlier on the pendant edge"""
    return instance(triangle_pendant, [0, 0, 0, 1])


# ============================================================================
# File helpers
# ============================================================================

@pytest.fixture
def write_json(tmp_path) -> Callable[[str, Any], str]:
    """Write data as JSON under tmp_path and return the path"""
    def _write(name: str, data: Any) -> str:
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return str(path)
    return _write
