"""Exact rational helpers shared across the package."""

from __future__ import annotations

import math
from fractions import Fraction


def rat(text: str) -> Fraction:
    """Parse a rational written as ``p/q`` or as a plain integer."""
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad rational {text!r}") from exc


def fmt(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def sqrt_exact(q: Fraction) -> Fraction | None:
    """Exact square root of a nonnegative rational, or None if irrational."""
    if q < 0:
        raise ValueError("negative")
    num, den = q.numerator, q.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


def dec(x, sig: int = 12) -> str:
    """Decimal rendering at a fixed number of significant digits."""
    return f"{float(x):.{sig}g}"
