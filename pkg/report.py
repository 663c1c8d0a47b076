"""
Run Report for verilocal
Collects what a command read, computed and how long it took, as deterministic JSON
"""

import hashlib
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from serialization import dump_json

logger = logging.getLogger(__name__)


def digest_file(path: str) -> str:
    """sha256 of a file's bytes"""
    sha = hashlib.sha256()
    with open(path, 'rb') as f:
        for block in iter(lambda: f.read(65536), b''):
            sha.update(block)
    return sha.hexdigest()


@dataclass
class RunReport:
    """Result of one command line run"""
    command: str
    arguments: Dict[str, Any] = field(default_factory=dict)
    input_digests: Dict[str, str] = field(default_factory=dict)
    payload: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    include_timing: bool = False
    start_time: Optional[float] = None
    end_time: Optional[float] = None

    def add_input(self, label: str, path: str):
        self.input_digests[label] = digest_file(path)

    def start_execution(self):
        self.start_time = time.perf_counter()

    def end_execution(self):
        self.end_time = time.perf_counter()

    @property
    def elapsed_seconds(self) -> Optional[float]:
        if self.start_time is None or self.end_time is None:
            return None
        return self.end_time - self.start_time

    def to_dict(self) -> Dict[str, Any]:
        data = {
            'command': self.command,
            'arguments': self.arguments,
            'inputs': self.input_digests,
            'result': self.payload,
        }
        if self.seed is not None:
            data['seed'] = self.seed
        if self.include_timing and self.elapsed_seconds is not None:
            data['timing'] = {'elapsed_seconds': round(self.elapsed_seconds, 6)}
        return data

    def to_json(self) -> str:
        return dump_json(self.to_dict())

    def write(self, path: Optional[str] = None) -> str:
        """Write to path, or return the text for stdout"""
        text = self.to_json()
        if path:
            with open(path, 'w') as f:
                f.write(text)
            logger.info(f"Report written to {path}")
        return text
