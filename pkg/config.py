"""
Configuration Module for verilocal
Handles solver limits, enumeration caps, and parallelism settings
"""

import os
import json
import logging
from dataclasses import dataclass, asdict, field
from typing import Any, Dict, Optional

from dotenv import load_dotenv

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_FILE = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'verilocal_config.json')


@dataclass
class SolverConfig:
    """Dual simplex limits"""
    max_pivots: int = 10000
    trace: bool = False


@dataclass
class EnumerationConfig:
    """Corner enumeration limits"""
    max_corners: int = 200000
    materialization_cap: int = 10 ** 6


@dataclass
class OracleConfig:
    """Brute-force oracle limits"""
    max_nodes: int = 8


@dataclass
class ProbabilityConfig:
    """Verifiability probability computation settings"""
    exact_budget: int = 3 ** 12
    threads: int = field(default_factory=lambda: os.cpu_count() or 1)
    chunk_size: int = 1000
    census_uniqueness: bool = True
    magnitude_resolution: int = 2 ** 20


class VerilocalConfiguration:
    """Manages verilocal configuration sections"""

    def __init__(self, config_file: Optional[str] = None, use_environment: bool = True):
        load_dotenv()
        self.config_file = config_file or os.getenv('VERILOCAL_CONFIG') or DEFAULT_CONFIG_FILE
        self.solver = SolverConfig()
        self.enumeration = EnumerationConfig()
        self.oracle = OracleConfig()
        self.probability = ProbabilityConfig()

        self._load_configuration()
        if use_environment:
            self._load_from_environment()
        self._validate()

    def _load_configuration(self):
        """Load configuration from file, falling back to defaults"""
        if not os.path.exists(self.config_file):
            logger.info(f"No configuration at {self.config_file}, using defaults")
            return
        try:
            with open(self.config_file, 'r') as f:
                self._parse_configuration(json.load(f))
        except (OSError, ValueError, TypeError) as e:
            logger.error(f"Failed to load configuration from {self.config_file}: {e}")

    def _parse_configuration(self, config_data: Dict[str, Any]):
        """Apply known keys of each JSON section onto the dataclasses"""
        for section_name in ('solver', 'enumeration', 'oracle', 'probability'):
            section = getattr(self, section_name)
            for key, value in config_data.get(section_name, {}).items():
                if hasattr(section, key):
                    setattr(section, key, value)
                else:
                    logger.warning(f"Ignoring unknown setting {section_name}.{key}")

    def _load_from_environment(self):
        """Load overrides from environment variables"""
        int_settings = {
            'VERILOCAL_THREADS': (self.probability, 'threads'),
            'VERILOCAL_EXACT_BUDGET': (self.probability, 'exact_budget'),
            'VERILOCAL_MAX_PIVOTS': (self.solver, 'max_pivots'),
            'VERILOCAL_MAX_CORNERS': (self.enumeration, 'max_corners'),
            'VERILOCAL_MATERIALIZATION_CAP': (self.enumeration, 'materialization_cap'),
            'VERILOCAL_ORACLE_MAX_NODES': (self.oracle, 'max_nodes'),
        }
        for variable, (section, key) in int_settings.items():
            raw = os.getenv(variable)
            if raw is None:
                continue
            try:
                setattr(section, key, int(raw))
            except ValueError:
                logger.error(f"Ignoring {variable}={raw!r}: not an integer")

        trace = os.getenv('VERILOCAL_TRACE')
        if trace is not None:
            self.solver.trace = trace.lower() == 'true'

    def _validate(self):
        """Clamp settings that must stay positive"""
        if self.probability.threads < 1:
            logger.warning(f"threads={self.probability.threads} is invalid, using 1")
            self.probability.threads = 1
        if self.probability.chunk_size < 1:
            self.probability.chunk_size = 1

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to dictionary"""
        return {
            'solver': asdict(self.solver),
            'enumeration': asdict(self.enumeration),
            'oracle': asdict(self.oracle),
            'probability': asdict(self.probability),
        }

    def save_to_file(self, filepath: Optional[str] = None):
        """Save configuration to JSON file"""
        filepath = filepath or self.config_file
        with open(filepath, 'w') as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)

    @classmethod
    def load_from_file(cls, filepath: str, use_environment: bool = True) -> 'VerilocalConfiguration':
        """Load configuration from JSON file"""
        return cls(config_file=filepath, use_environment=use_environment)


# Global configuration instance
verilocal_config = VerilocalConfiguration()
