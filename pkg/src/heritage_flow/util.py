"""Small helpers shared across modules."""

from __future__ import annotations

import hashlib
import math
import re
from datetime import timedelta
from pathlib import Path

# Guards against float products landing a hair above an integer
# (e.g. a fraction*count that is mathematically exact).
_CEIL_EPS = 1e-9

_DURATION_RE = re.compile(r"^\s*(\d+(?:\.\d+)?)\s*([smhd])?\s*$")

_UNIT_SECONDS = {"s": 1.0, "m": 60.0, "h": 3600.0, "d": 86400.0}


def ceil_fraction(fraction: float, count: int) -> int:
    """Ceiling of fraction*count, robust to floating-point round-up."""
    if count <= 0:
        return 0
    return max(0, math.ceil(fraction * count - _CEIL_EPS))


def parse_duration(text: str) -> timedelta:
    """Parse durations like '90s', '15m', '24h', '2d'; a bare number means seconds."""
    m = _DURATION_RE.match(text)
    if m is None:
        raise ValueError(f"unparseable duration: {text!r}")
    value = float(m.group(1))
    unit = m.group(2) or "s"
    return timedelta(seconds=value * _UNIT_SECONDS[unit])


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()
