"""Iteration traces: error-vs-iteration records and their CSV form.

Traces are the common output of every solver run in the package.  The CSV
layout is `#key=value` comment lines followed by an `iter,error` header and
one row per recorded iteration, all floats at full precision (%.17g) so that
reruns can be compared byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = ["IterationTrace", "save_trace", "load_trace"]


@dataclass
class IterationTrace:
    """Error history of one solver run.

    ``iterations`` holds the iteration indices (0 = initial point) and
    ``errors`` the matching error metric; ``meta`` carries run parameters
    as flat key -> str/float/int pairs.
    """

    iterations: np.ndarray
    errors: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        it = np.asarray(self.iterations, dtype=np.int64).ravel()
        er = np.asarray(self.errors, dtype=np.float64).ravel()
        if it.size != er.size:
            raise ValueError("iterations and errors must have equal length")
        self.iterations = it
        self.errors = er

    def __len__(self) -> int:
        return int(self.iterations.size)

    @property
    def method(self) -> Optional[str]:
        return self.meta.get("method")

    @property
    def schedule_kind(self) -> Optional[str]:
        return self.meta.get("schedule_kind")

    @property
    def seed(self) -> Optional[int]:
        return self.meta.get("seed")

    @property
    def final_error(self) -> float:
        if self.errors.size == 0:
            raise ValueError("empty trace")
        return float(self.errors[-1])

    def error_at(self, iteration: int) -> float:
        """Error recorded at the given iteration index."""
        idx = np.nonzero(self.iterations == iteration)[0]
        if idx.size == 0:
            raise KeyError(f"iteration {iteration} not in trace")
        return float(self.errors[idx[0]])

    def first_iteration_below(self, threshold: float) -> Optional[int]:
        """Smallest recorded iteration with error <= threshold, or None."""
        idx = np.nonzero(self.errors <= threshold)[0]
        if idx.size == 0:
            return None
        return int(self.iterations[idx[0]])


def _format_meta_value(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def save_trace(path, trace: IterationTrace) -> None:
    """Write a trace as CSV: #key=value comments, iter,error header, data rows."""
    with open(path, "w", encoding="ascii") as fh:
        for key in sorted(trace.meta):
            fh.write(f"#{key}={_format_meta_value(trace.meta[key])}\n")
        fh.write("iter,error\n")
        for it, er in zip(trace.iterations, trace.errors):
            fh.write(f"{int(it)},{er:.17g}\n")


def load_trace(path) -> IterationTrace:
    """Read a trace written by :func:`save_trace`.

    Metadata values are parsed back as int, then float, then left as str.
    """
    meta = {}
    iterations = []
    errors = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition("=")
                meta[key] = _parse_meta_value(value)
                continue
            if line == "iter,error":
                continue
            it_s, _, er_s = line.partition(",")
            iterations.append(int(it_s))
            errors.append(float(er_s))
    return IterationTrace(
        iterations=np.array(iterations, dtype=np.int64),
        errors=np.array(errors, dtype=np.float64),
        meta=meta,
    )


def _parse_meta_value(value: str):
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        pass
    if value == "true":
        return True
    if value == "false":
        return False
    return value
