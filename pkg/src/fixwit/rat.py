"""Exact rational parsing/formatting: all numeric values travel as "p/q" strings."""

from __future__ import annotations

from fractions import Fraction

from .errors import StructuralError


def parse_rational(text: str) -> Fraction:
    """Parse "p/q" (also plain integers like "0", "1"). Decimal floats are rejected."""
    if not isinstance(text, str):
        raise StructuralError(f"rational must be a string like 'p/q', got {text!r}")
    s = text.strip()
    if "." in s or "e" in s.lower():
        raise StructuralError(f"rational {text!r} must be exact 'p/q', not a decimal")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise StructuralError(f"malformed rational {text!r}: {exc}") from exc


def parse_unit_rational(text: str) -> Fraction:
    q = parse_rational(text)
    if not 0 <= q <= 1:
        raise StructuralError(f"rational {text!r} out of [0,1]")
    return q


def format_rational(q: Fraction) -> str:
    return str(Fraction(q))
