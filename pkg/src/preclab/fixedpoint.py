"""Bit-exact signed fixed-point arithmetic.

A value is a two's-complement integer ``raw`` interpreted against a
``QFormat`` with ``m`` integer bits (sign included) and ``n`` fractional
bits, so its real value is ``raw * 2**-n``.  Either ``m`` or ``n`` may be
negative (pure-fractional or pure-integer layouts) as long as the total
width ``m + n`` is at least 1.

Binary operators propagate formats with the classic rules: add/sub align
binary points and take a common integer width, mul/div produce full-width
results that can never overflow (the one exception for div is documented
on :func:`fxp_div`).  Quantization supports truncation, round-to-nearest
(midpoints up) and convergent round-to-nearest-even; overflow is handled
by two's-complement wrap-around or saturation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import NamedTuple, Optional, Tuple

from .exact import Real, floor_frac, pow2, round_nearest_even, round_nearest_up, to_fraction

__all__ = [
    "RoundingMode",
    "OverflowMode",
    "ArithOp",
    "QFormat",
    "FxPValue",
    "fxp_value",
    "range_of",
    "encode",
    "decode",
    "quantize",
    "convert",
    "propagate_format",
    "fxp_add_sub",
    "fxp_add",
    "fxp_sub",
    "fxp_mul",
    "fxp_div",
    "wrap_value",
    "saturate_value",
]


class RoundingMode(Enum):
    """Quantization rule used when fractional bits are discarded."""

    TRUNCATE = "trunc"        # round toward -inf (plain bit drop)
    NEAREST_UP = "nearest"    # round to nearest, midpoints toward +inf
    NEAREST_EVEN = "convergent"  # round to nearest, midpoints to even


class OverflowMode(Enum):
    WRAP = "wrap"
    SATURATE = "sat"


class ArithOp(Enum):
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    DIV = "div"


_FMT_RE = re.compile(r"^(u?)Q(-?\d+)\.(-?\d+)$")


@dataclass(frozen=True)
class QFormat:
    """Fixed-point format Qm.n: m integer bits (incl. sign), n fractional bits."""

    m: int
    n: int
    signed: bool = True

    def __post_init__(self):
        if self.m + self.n < 1:
            raise ValueError(f"total width {self.m}+{self.n} must be >= 1")

    @property
    def width(self) -> int:
        return self.m + self.n

    @property
    def step(self) -> Fraction:
        """Quantization step: the weight of the least significant bit."""
        return pow2(-self.n)

    @property
    def min_value(self) -> Fraction:
        return -pow2(self.m - 1) if self.signed else Fraction(0)

    @property
    def max_value(self) -> Fraction:
        if self.signed:
            return pow2(self.m - 1) - self.step
        return pow2(self.m) - self.step

    @property
    def raw_min(self) -> int:
        return -(1 << (self.width - 1)) if self.signed else 0

    @property
    def raw_max(self) -> int:
        return (1 << (self.width - 1)) - 1 if self.signed else (1 << self.width) - 1

    def __str__(self) -> str:
        return f"{'' if self.signed else 'u'}Q{self.m}.{self.n}"

    @classmethod
    def parse(cls, text: str) -> "QFormat":
        mm = _FMT_RE.match(text.strip())
        if not mm:
            raise ValueError(f"bad Q-format {text!r} (expected 'Qm.n' or 'uQm.n')")
        return cls(int(mm.group(2)), int(mm.group(3)), signed=(mm.group(1) != "u"))


def range_of(fmt: QFormat) -> Tuple[Fraction, Fraction]:
    """Closed representable interval [min, max] of a format, exactly."""
    return fmt.min_value, fmt.max_value


class FxPValue(NamedTuple):
    """A raw two's-complement integer paired with its format.

    Constructed by the library's own operators without re-validation (they
    can only produce in-range raws); use :func:`fxp_value` or :func:`encode`
    to build values from external data.
    """

    raw: int
    fmt: QFormat

    @property
    def value(self) -> Fraction:
        return self.raw * pow2(-self.fmt.n)

    def __float__(self) -> float:
        return self.raw * 2.0 ** (-self.fmt.n)

    def __str__(self) -> str:
        return f"{self.raw}:{self.fmt}"


def fxp_value(raw: int, fmt: QFormat) -> FxPValue:
    """Validated FxPValue constructor."""
    if not (fmt.raw_min <= raw <= fmt.raw_max):
        raise ValueError(f"raw {raw} outside {fmt} range [{fmt.raw_min}, {fmt.raw_max}]")
    return FxPValue(raw, fmt)


# ---------------------------------------------------------------------------
# raw-level helpers (hot path: ints only)

_TRUNC = RoundingMode.TRUNCATE
_NUP = RoundingMode.NEAREST_UP
_NEVEN = RoundingMode.NEAREST_EVEN


def _round_shift(v: int, d: int, rounding: RoundingMode) -> int:
    """Drop d >= 0 low bits of v under the given rounding rule."""
    if d <= 0:
        return v
    if rounding is _TRUNC:
        return v >> d
    if rounding is _NUP:
        return (v + (1 << (d - 1))) >> d
    k = v >> d
    rem = v - (k << d)
    half = 1 << (d - 1)
    if rem > half or (rem == half and k & 1):
        k += 1
    return k


def _fit_raw(k: int, fmt: QFormat, overflow: OverflowMode) -> int:
    lo, hi = fmt.raw_min, fmt.raw_max
    if lo <= k <= hi:
        return k
    if overflow is OverflowMode.SATURATE:
        return lo if k < lo else hi
    span = 1 << fmt.width
    return ((k - lo) & (span - 1)) + lo


def _fit_raw_ex(k: int, fmt: QFormat, overflow: OverflowMode) -> Tuple[int, bool]:
    """Like _fit_raw but also reports whether overflow handling fired."""
    if fmt.raw_min <= k <= fmt.raw_max:
        return k, False
    return _fit_raw(k, fmt, overflow), True


# ---------------------------------------------------------------------------
# encode / decode / quantize


def encode(
    x: Real,
    fmt: QFormat,
    rounding: RoundingMode = RoundingMode.NEAREST_EVEN,
    overflow: OverflowMode = OverflowMode.SATURATE,
) -> FxPValue:
    """Quantize an exact real onto the format grid, then handle overflow."""
    t = to_fraction(x) * pow2(fmt.n)
    if rounding is _TRUNC:
        k = floor_frac(t)
    elif rounding is _NUP:
        k = round_nearest_up(t)
    else:
        k = round_nearest_even(t)
    return FxPValue(_fit_raw(k, fmt, overflow), fmt)


def decode(v: FxPValue) -> Fraction:
    """Exact real value raw * 2**-n."""
    return v.raw * pow2(-v.fmt.n)


def quantize(
    v: FxPValue,
    n_target: int,
    rounding: RoundingMode,
    overflow: OverflowMode = OverflowMode.SATURATE,
) -> FxPValue:
    """Discard fractional bits down to n_target, keeping the integer width.

    A round-up carry out of the all-ones pattern can leave the format's
    range; that corner is resolved by ``overflow`` (saturation by default).
    """
    d = v.fmt.n - n_target
    if d < 0:
        raise ValueError(
            f"n_target={n_target} exceeds current n={v.fmt.n}; quantize only discards bits"
        )
    out = QFormat(v.fmt.m, n_target, v.fmt.signed)
    k = _round_shift(v.raw, d, rounding)
    return FxPValue(_fit_raw(k, out, overflow), out)


def convert(
    v: FxPValue,
    fmt: QFormat,
    rounding: RoundingMode = RoundingMode.TRUNCATE,
    overflow: OverflowMode = OverflowMode.SATURATE,
) -> FxPValue:
    """Re-encode into an arbitrary format (both m and n may change)."""
    d = v.fmt.n - fmt.n
    k = (v.raw << -d) if d < 0 else _round_shift(v.raw, d, rounding)
    return FxPValue(_fit_raw(k, fmt, overflow), fmt)


# ---------------------------------------------------------------------------
# format propagation and arithmetic


def propagate_format(
    op: ArithOp,
    fx: QFormat,
    fy: QFormat,
    mz_hint: Optional[int] = None,
) -> QFormat:
    """Output format of x <op> y per the standard propagation rules.

    For add/sub the common integer width is max(m_x, m_y, m_z) where m_z
    comes from knowledge of the output range; without a hint the safe
    default max(m_x, m_y) + 1 is used.  Mul and div widths are the sums
    that make the full result representable.
    """
    if not (fx.signed and fy.signed):
        raise ValueError("format propagation is defined for signed formats only")
    if op in (ArithOp.ADD, ArithOp.SUB):
        mz = mz_hint if mz_hint is not None else max(fx.m, fy.m) + 1
        return QFormat(max(fx.m, fy.m, mz), max(fx.n, fy.n))
    if op is ArithOp.MUL:
        return QFormat(fx.m + fy.m, fx.n + fy.n)
    if op is ArithOp.DIV:
        return QFormat(fx.m + fy.n, fx.n + fy.m)
    raise ValueError(f"unknown op {op}")


def fxp_add_sub(
    x: FxPValue,
    y: FxPValue,
    out: Optional[QFormat] = None,
    *,
    subtract: bool = False,
    rounding: RoundingMode = RoundingMode.TRUNCATE,
    overflow: OverflowMode = OverflowMode.WRAP,
) -> FxPValue:
    """x +/- y: exact aligned sum, then encoded into ``out``.

    With the propagated default ``out`` the result is exact; a narrower
    ``out`` exercises ``rounding`` (fewer fractional bits) and ``overflow``
    (fewer integer bits).  Bit-exact equal to exact rational arithmetic
    followed by :func:`encode` with the same modes.
    """
    fx, fy = x.fmt, y.fmt
    if out is None:
        out = propagate_format(ArithOp.SUB if subtract else ArithOp.ADD, fx, fy)
    n_hi = fx.n if fx.n >= fy.n else fy.n
    sx = x.raw << (n_hi - fx.n)
    sy = y.raw << (n_hi - fy.n)
    s = sx - sy if subtract else sx + sy
    d = n_hi - out.n
    k = (s << -d) if d < 0 else _round_shift(s, d, rounding)
    return FxPValue(_fit_raw(k, out, overflow), out)


def fxp_add(x: FxPValue, y: FxPValue, out: Optional[QFormat] = None, **kw) -> FxPValue:
    return fxp_add_sub(x, y, out, subtract=False, **kw)


def fxp_sub(x: FxPValue, y: FxPValue, out: Optional[QFormat] = None, **kw) -> FxPValue:
    return fxp_add_sub(x, y, out, subtract=True, **kw)


def fxp_mul(x: FxPValue, y: FxPValue) -> FxPValue:
    """Exact full-width product in Q(m_x+m_y).(n_x+n_y); never overflows."""
    out = QFormat(x.fmt.m + y.fmt.m, x.fmt.n + y.fmt.n)
    return FxPValue(x.raw * y.raw, out)


def fxp_div(
    x: FxPValue,
    y: FxPValue,
    overflow: OverflowMode = OverflowMode.SATURATE,
) -> FxPValue:
    """Quotient rounded toward -inf into Q(m_x+n_y).(n_x+m_y).

    The output width covers the extreme quotient -2**(m_x-1) / 2**-n_y.
    Its positive mirror +2**(m_x-1+n_y) (raw minimum divided by raw -1)
    exceeds the two's-complement maximum by one step; that single corner
    is resolved by ``overflow``.
    """
    if y.raw == 0:
        raise ZeroDivisionError("fixed-point division by zero")
    out = QFormat(x.fmt.m + y.fmt.n, x.fmt.n + y.fmt.m)
    # quotient / step = raw_x * 2**(m_y + n_y) / raw_y, floored exactly
    num = x.raw << (y.fmt.m + y.fmt.n)
    k = num // y.raw if y.raw > 0 else (-num) // (-y.raw)
    return FxPValue(_fit_raw(k, out, overflow), out)


# ---------------------------------------------------------------------------
# value-level overflow formulas (used by oracles and documentation examples)


def wrap_value(x: Real, m: int) -> Fraction:
    """Wrap-around of a real value into [-2**(m-1), 2**(m-1))."""
    half = pow2(m - 1)
    span = pow2(m)
    return (to_fraction(x) + half) % span - half


def saturate_value(x: Real, fmt: QFormat) -> Fraction:
    """Clamp a real value to the closed representable range of ``fmt``."""
    v = to_fraction(x)
    lo, hi = fmt.min_value, fmt.max_value
    return lo if v < lo else hi if v > hi else v
