"""Engineering-notation parsing and formatting (``"40f"`` -> 4e-14)."""

from __future__ import annotations

import math
import re

from .errors import DomainError

PREFIXES = {
    "a": 1e-18, "f": 1e-15, "p": 1e-12, "n": 1e-9, "u": 1e-6, "µ": 1e-6,
    "m": 1e-3, "k": 1e3, "M": 1e6, "G": 1e9, "T": 1e12,
}
UNITS = ("Hz", "Ohm", "ohm", "F", "H", "S", "V", "A", "K", "s", "Ω")

_QUANTITY = re.compile(
    r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([afpnuµmkMGT]?)\s*(" +
    "|".join(UNITS) + r")?\s*$")


def parse_quantity(value) -> float:
    """Accept a bare number or a string like ``"10m"``, ``"21.0G"``, ``"40fF"``."""
    if isinstance(value, bool):
        raise DomainError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise DomainError(f"expected a number or quantity string, got {value!r}")
    m = _QUANTITY.match(value)
    if not m:
        raise DomainError(f"cannot read quantity {value!r}")
    number, prefix, _unit = m.groups()
    return float(number) * PREFIXES.get(prefix, 1.0) if prefix else float(number)


_ENG = [(1e12, "T"), (1e9, "G"), (1e6, "M"), (1e3, "k"), (1.0, ""), (1e-3, "m"),
        (1e-6, "u"), (1e-9, "n"), (1e-12, "p"), (1e-15, "f"), (1e-18, "a")]


def format_eng(value: float, unit: str = "", digits: int = 4, fixed: int | None = None) -> str:
    """``format_eng(2.5e10, "Hz", fixed=2) -> "25.00 GHz"``."""
    if value == 0 or not math.isfinite(value):
        return f"{value:g} {unit}".rstrip()
    mag = abs(value)
    for scale, prefix in _ENG:
        if mag >= scale * 0.9995:
            break
    mant = value / scale
    text = f"{mant:.{fixed}f}" if fixed is not None else f"{mant:.{digits}g}"
    return f"{text} {prefix}{unit}".rstrip()
