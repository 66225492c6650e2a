"""Report containers and their JSON/CSV serialization."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


def _plain(obj):
    # numpy scalars/arrays and non-finite floats -> JSON-safe values
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: _plain(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def to_json(obj) -> str:
    """Deterministic JSON text: sorted keys, fixed float repr."""
    return json.dumps(_plain(obj), sort_keys=True, indent=2)


def write_json(path, obj):
    Path(path).write_text(to_json(obj) + "\n")


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


@dataclass
class IdentityCheck:
    identity: str
    max_abs_err: float
    max_rel_err: float
    samples: int
    seed: int
    tolerance: float
    passed: bool


@dataclass
class IdentityReport:
    checks: list[IdentityCheck]
    samples: int
    seed: int
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name) -> IdentityCheck:
        for c in self.checks:
            if c.identity == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {
            "passed": self.passed,
            "samples": self.samples,
            "seed": self.seed,
            "notes": self.notes,
            "checks": [_plain(c) for c in self.checks],
        }


@dataclass
class ResidualReport:
    max_abs: float
    max_rel: float
    argmax: float
    size: int
    skipped: int = 0
    floor_binds: int = 0

    def to_dict(self):
        return _plain(self)


@dataclass
class InequalityReport:
    inequality: str
    samples: int
    violations: int
    worst_margin: float
    constant: float
    constant_source: str
    slack: float = 1e-12
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self):
        d = _plain(self)
        d["passed"] = self.passed
        return d
