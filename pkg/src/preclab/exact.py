"""Exact dyadic/rational arithmetic helpers shared by the numeric cores.

Everything here works on python ints and ``fractions.Fraction`` so that no
binary-float rounding sneaks into encoders, oracles or range analysis.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Union

Real = Union[int, float, str, Fraction]


@lru_cache(maxsize=None)
def pow2(k: int) -> Fraction:
    """2**k as an exact Fraction, for any sign of k."""
    if k >= 0:
        return Fraction(1 << k)
    return Fraction(1, 1 << -k)


def to_fraction(x: Real) -> Fraction:
    """Coerce to an exact Fraction.

    Floats convert to their exact binary value; strings are parsed as
    decimal ("3.9") or ratio ("39/10") text.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        if x != x or x in (float("inf"), float("-inf")):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(x)
    return Fraction(x)


def floor_log2(x: Fraction) -> int:
    """Largest k with 2**k <= x, computed exactly. Requires x > 0."""
    if x <= 0:
        raise ValueError("floor_log2 requires a positive argument")
    p, q = x.numerator, x.denominator
    k = p.bit_length() - q.bit_length()
    # k or k-1; decide by exact comparison p/q >= 2**k
    if k >= 0:
        if p < (q << k):
            k -= 1
    else:
        if (p << -k) < q:
            k -= 1
    return k


def ceil_log2(x: Fraction) -> int:
    """Smallest k with 2**k >= x, computed exactly. Requires x > 0."""
    k = floor_log2(x)
    return k if is_pow2(x) else k + 1


def is_pow2(x: Fraction) -> bool:
    """True when x equals 2**k for some integer k (x > 0)."""
    p, q = x.numerator, x.denominator
    return p > 0 and (p & (p - 1)) == 0 and (q & (q - 1)) == 0


def floor_frac(x: Fraction) -> int:
    return x.numerator // x.denominator


def round_nearest_up(x: Fraction) -> int:
    """Round to nearest integer, exact midpoints toward +inf."""
    return (2 * x.numerator + x.denominator) // (2 * x.denominator)


def round_nearest_even(x: Fraction) -> int:
    """Round to nearest integer, exact midpoints to the even integer."""
    k = x.numerator // x.denominator
    rem = x - k
    if 2 * rem.numerator > rem.denominator:
        return k + 1
    if 2 * rem.numerator == rem.denominator and k & 1:
        return k + 1
    return k


def decimal_str(x: Fraction) -> str:
    """Exact decimal rendering of a dyadic rational (denominator 2**k).

    Non-dyadic denominators fall back to the "p/q" form.
    """
    p, q = x.numerator, x.denominator
    if q & (q - 1):
        return f"{p}/{q}"
    k = q.bit_length() - 1
    if k == 0:
        return str(p)
    digits = abs(p) * 5**k  # p/2^k = p*5^k / 10^k
    s = str(digits).rjust(k + 1, "0")
    sign = "-" if p < 0 else ""
    return f"{sign}{s[:-k]}.{s[-k:]}"
