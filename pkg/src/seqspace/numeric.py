"""Numeric kernels: exact rationals or IEEE-754 doubles behind one interface."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Sequence

import mpmath

RATIONAL = "rational"
FLOAT = "float"
MODES = (RATIONAL, FLOAT)

# precision used when a rational-mode quantity needs an irrational root or power
MP_DPS = 50

# float-mode magnitude beyond which results are flagged as unreliable
FLOAT_MAGNITUDE_LIMIT = 1e150


class SeqSpaceError(Exception):
    """Base class for toolkit errors."""


class ValidationError(SeqSpaceError, ValueError):
    pass


class RangeError(SeqSpaceError, IndexError):
    """A term was requested outside the defined range of a sequence."""


class DimensionMismatch(ValidationError):
    pass


class BadExponent(ValidationError):
    pass


class ZeroS0(ValidationError):
    pass


class ZeroR(ValidationError):
    pass


class ZeroT(ValidationError):
    pass


class NumericPolicyError(SeqSpaceError, ArithmeticError):
    """Raised when a float computation leaves the trusted magnitude range."""


class SeriesDivergence(NumericPolicyError):
    pass


class LossOfPrecision(RuntimeWarning):
    """Float results whose rounding error can exceed the mode tolerance."""


@dataclass(frozen=True)
class NumericMode:
    kind: str = RATIONAL
    tol: float = 1e-12

    def __post_init__(self):
        if self.kind not in MODES:
            raise ValidationError(f"unknown numeric mode {self.kind!r}")
        if not self.tol > 0:
            raise ValidationError("tolerance must be positive")

    @property
    def exact(self) -> bool:
        return self.kind == RATIONAL

    def num(self, v: Any):
        """Convert ``v`` into the kernel's number type."""
        if self.exact:
            return to_fraction(v)
        return float(v)

    def vec(self, values: Iterable[Any]) -> list:
        return [self.num(v) for v in values]

    def zero(self):
        return Fraction(0) if self.exact else 0.0

    def one(self):
        return Fraction(1) if self.exact else 1.0


def as_mode(mode: NumericMode | str | None) -> NumericMode:
    if mode is None:
        return NumericMode()
    if isinstance(mode, NumericMode):
        return mode
    return NumericMode(mode)


def to_fraction(v: Any) -> Fraction:
    """Exact conversion; decimal strings keep their power-of-ten denominator."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, bool):
        raise ValidationError("booleans are not numbers here")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValidationError(f"non-finite value {v!r}")
        return Fraction(v)
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"cannot parse {v!r} as a rational") from exc
    if isinstance(v, mpmath.mpf):
        man, exp = v.man_exp
        return Fraction(man) * Fraction(2) ** exp
    try:
        return Fraction(v)
    except TypeError as exc:
        raise ValidationError(f"cannot convert {v!r} to a rational") from exc


def binomial(n: int, k: int, mode: NumericMode):
    """C(n, k) by the multiplicative formula in the active kernel; 0 outside 0 <= k <= n."""
    if k < 0 or n < 0 or k > n:
        return mode.zero()
    k = min(k, n - k)
    if mode.exact:
        return Fraction(math.comb(n, k))
    acc = 1.0
    for i in range(1, k + 1):
        acc = acc * (n - k + i) / i
    return acc


def binomial_row(upper_offset: int, count: int, mode: NumericMode) -> list:
    """Values C(upper_offset + q, q) for q = 0..count-1.

    These are the coefficients of (1 - z)^(-upper_offset - 1), i.e. the
    entries of the m-fold summation matrix when ``upper_offset = m - 1``.
    """
    out = []
    c = mode.one()
    for q in range(count):
        if q > 0:
            c = c * (upper_offset + q) / q
        out.append(c)
    return out


def check_float_policy(values: Sequence) -> bool:
    """True when every float is finite and below the trusted magnitude."""
    for v in values:
        if isinstance(v, float) and (not math.isfinite(v) or abs(v) > FLOAT_MAGNITUDE_LIMIT):
            return False
    return True


def power(value, exponent, mode: NumericMode):
    """|value| ** exponent, exact whenever the kernel allows it.

    Rational mode returns a Fraction for integer exponents and a 50-digit
    ``mpmath.mpf`` otherwise.
    """
    a = abs(value)
    if mode.exact:
        e = to_fraction(exponent)
        if e.denominator == 1:
            return a ** int(e)
        with mpmath.workdps(MP_DPS):
            base = mpmath.mpf(a.numerator) / a.denominator
            if base == 0:
                return base
            return mpmath.power(base, mpmath.mpf(e.numerator) / e.denominator)
    return float(a) ** float(exponent)


def root(value, degree, mode: NumericMode):
    """value ** (1/degree) for value >= 0."""
    d = to_fraction(degree) if mode.exact else float(degree)
    if mode.exact:
        if d == 1:
            return value
        with mpmath.workdps(MP_DPS):
            v = value if isinstance(value, mpmath.mpf) else mpmath.mpf(value.numerator) / value.denominator
            if v == 0:
                return mpmath.mpf(0)
            return mpmath.power(v, mpmath.mpf(d.denominator) / d.numerator)
    if d == 1:
        return float(value)
    return float(value) ** (1.0 / d)


def precise():
    """Context for rational-mode arithmetic on irrational intermediates."""
    return mpmath.workdps(MP_DPS)


def fmt(v) -> str | float | int:
    """JSON-friendly rendering: exact rationals as strings, floats as floats."""
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v)
    if isinstance(v, mpmath.mpf):
        return mpmath.nstr(v, 20)
    if isinstance(v, (int, float)):
        return v
    return str(v)
