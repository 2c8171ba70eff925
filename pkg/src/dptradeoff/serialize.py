"""Shared serialization conventions for reports, the HTTP service and the CLI.

Both front ends emit bytes produced by these helpers, which is what makes CLI
output and service responses byte-identical for the same inputs. JSON never
contains IEEE infinities: an unbounded risk ratio serializes as the string
"unbounded" and an absent privacy parameter as "unprotected".
"""

from __future__ import annotations

import json
import math
from typing import Iterable, Sequence

from .errors import ConfigurationError

UNBOUNDED_SENTINEL = "unbounded"
UNPROTECTED_SENTINEL = "unprotected"


def encode_extended(value: float, sentinel: str) -> object:
    """Map +inf to the given string sentinel; finite values pass through."""
    if math.isinf(value):
        if value > 0:
            return sentinel
        raise ConfigurationError("negative infinity has no JSON encoding")
    if math.isnan(value):
        raise ConfigurationError("NaN has no JSON encoding")
    return value


def decode_extended(value: object, sentinel: str, field: str) -> float:
    """Inverse of encode_extended for request parsing."""
    if value == sentinel:
        return math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{field} must be a number or {sentinel!r}, got {value!r}")
    return float(value)


def json_text(payload: dict) -> str:
    """Canonical JSON rendering: compact separators, trailing newline."""
    return json.dumps(payload, ensure_ascii=False, separators=(",", ":")) + "\n"


def csv_text(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    """Plain comma-joined CSV; numbers use shortest round-trip decimals."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_csv_cell(cell) for cell in row))
    return "\n".join(lines) + "\n"


def _csv_cell(cell: object) -> str:
    if isinstance(cell, float):
        return repr(cell)
    return str(cell)


def parse_grid(text: str) -> tuple:
    """Parse the shared grid syntax: "start:stop:step" or a comma list.

    The range form is endpoint inclusive; the same string parses to the same
    floats in the CLI and the service.
    """
    from .errors import DomainError

    text = text.strip()
    if not text:
        raise DomainError("grid must not be empty")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise DomainError(f"grid ranges look like start:stop:step, got {text!r}")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise DomainError(f"grid ranges need numeric start:stop:step, got {text!r}")
        if not step > 0.0:
            raise DomainError(f"grid step must be > 0, got {step}")
        if not start <= stop:
            raise DomainError(f"grid start must not exceed stop, got {text!r}")
        count = int(math.floor((stop - start) / step + 1e-9))
        values = [start + i * step for i in range(count + 1)]
        if values and abs(values[-1] - stop) < step * 1e-9:
            values[-1] = stop
        return tuple(values)
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError:
        raise DomainError(f"grid must be numbers separated by commas, got {text!r}")
