"""Exact cost arithmetic: Fractions plus a single infinity.

Infinity is ``math.inf``.  It absorbs addition and dominates every
Fraction in comparisons, which is all the arithmetic the measures need.
The one trap is ``0 * inf``; use :func:`scale` for weight times count.
"""

import math
from fractions import Fraction
from typing import Union

INF = math.inf

Cost = Union[Fraction, float]


def is_inf(x) -> bool:
    return isinstance(x, float) and math.isinf(x)


def as_cost(x) -> Cost:
    """Coerce ints, Fractions, numeric strings and 'inf' to a cost."""
    if isinstance(x, str):
        s = x.strip().lower()
        if s in ("inf", "infinity", "∞"):
            return INF
        try:
            return Fraction(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational: {x!r}") from exc
    if is_inf(x):
        if x < 0:
            raise ValueError("negative infinity is not a cost")
        return INF
    if isinstance(x, float):
        raise ValueError("floats are not accepted as exact costs; use a string or Fraction")
    return Fraction(x)


def scale(weight: Cost, count) -> Cost:
    # 0 * inf would be nan; zero uses of a forbidden operation cost nothing
    if count == 0:
        return Fraction(0)
    return weight * count


def fmt(x) -> str:
    if is_inf(x):
        return "inf"
    return str(Fraction(x))
