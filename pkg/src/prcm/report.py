"""Machine-readable reports.

Exact rationals are written as ``"num/den"`` strings (never floats), so a
report round-trips without precision loss. Floats appear only for Monte
Carlo estimates, always next to their error fields.
"""

import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"
RNG_NAME = "PCG64"


def serialize(value: Any) -> Any:
    """Convert a result tree into JSON-compatible values."""
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return [serialize(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): serialize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [serialize(v) for v in items]
    if hasattr(value, "to_dict"):
        return serialize(value.to_dict())
    return value


@dataclass
class VerificationReport:
    """Outcome of one exact identity check.

    ``witness`` holds the first counterexample (configurations, pairs, ...)
    when the check failed.
    """
    check: str
    passed: bool
    details: Dict[str, Any] = field(default_factory=dict)
    witness: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        return serialize({
            "check": self.check,
            "passed": self.passed,
            "details": self.details,
            "witness": self.witness,
        })


@dataclass
class Report:
    """Top-level report of one CLI run.

    ``observables`` rows feed the CSV output: one row per
    (parameter point, observable).
    """
    command: str
    config: Dict[str, Any]
    passed: bool = True
    results: Dict[str, Any] = field(default_factory=dict)
    observables: List[Dict[str, Any]] = field(default_factory=list)
    schema_version: str = SCHEMA_VERSION
    code_version: str = ""
    rng: str = RNG_NAME

    def __post_init__(self):
        if not self.code_version:
            from . import __version__
            self.code_version = __version__

    def to_dict(self) -> Dict[str, Any]:
        return serialize({
            "schema_version": self.schema_version,
            "code_version": self.code_version,
            "command": self.command,
            "rng": self.rng,
            "passed": self.passed,
            "config": self.config,
            "results": self.results,
            "observables": self.observables,
        })

    def csv_rows(self) -> List[Dict[str, Any]]:
        point = {k: self.config.get(k) for k in ("d", "i", "q", "p", "box", "convention", "boundary")}
        rows = []
        for obs in self.observables:
            row = dict(serialize(point))
            row.update({
                "command": self.command,
                "observable": obs.get("name"),
                "value": serialize(obs.get("value")),
                "stderr": serialize(obs.get("stderr")),
            })
            rows.append(row)
        return rows


CSV_FIELDS = ["command", "d", "i", "q", "p", "box", "convention", "boundary", "observable", "value", "stderr"]


def render_report(report: Report, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in report.csv_rows():
            writer.writerow(row)
        return buffer.getvalue()
    raise ValueError(f"Unknown report format {fmt!r}")


def emit_report(report: Report, path: Optional[str] = None, fmt: str = "json") -> str:
    """Write the report to ``path`` (stdout when None) and return the text.

    Raises:
        OSError: If the path is not writable
    """
    text = render_report(report, fmt)
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)
        logger.info(f"Wrote {fmt} report to {path}")
    return text
