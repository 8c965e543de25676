from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import pytest

from seqspace.numeric import (
    NumericMode,
    ValidationError,
    binomial,
    binomial_row,
    check_float_policy,
    power,
    root,
    to_fraction,
)

R = NumericMode("rational")
F = NumericMode("float")


@pytest.mark.parametrize("text, expected", [
    ("1.5", Fraction(3, 2)),
    ("-0.125", Fraction(-1, 8)),
    ("0.1", Fraction(1, 10)),
    ("2/3", Fraction(2, 3)),
    ("1e-3", Fraction(1, 1000)),
])
def test_decimal_strings_parse_exactly(text, expected):
    assert to_fraction(text) == expected


def test_bad_inputs_rejected():
    with pytest.raises(ValidationError):
        to_fraction("abc")
    with pytest.raises(ValidationError):
        to_fraction(float("nan"))
    with pytest.raises(ValidationError):
        to_fraction(True)
    with pytest.raises(ValidationError):
        NumericMode("decimal")
    with pytest.raises(ValidationError):
        NumericMode("float", tol=0)


def test_mpf_roundtrip_is_exact():
    with mpmath.workdps(50):
        v = mpmath.mpf(3) / 8
    assert to_fraction(v) == Fraction(3, 8)


@pytest.mark.parametrize("n", range(0, 12))
def test_binomial_matches_math_comb(n):
    for k in range(-1, n + 2):
        expected = math.comb(n, k) if 0 <= k <= n else 0
        assert binomial(n, k, R) == expected
        assert binomial(n, k, F) == pytest.approx(expected)


@pytest.mark.parametrize("offset", [0, 1, 2, 4])
def test_binomial_row_is_summation_kernel(offset):
    row = binomial_row(offset, 8, R)
    assert row == [math.comb(offset + q, q) for q in range(8)]


def test_power_exact_for_integer_exponent():
    assert power(Fraction(-2, 3), 3, R) == Fraction(8, 27)
    assert isinstance(power(Fraction(1, 4), Fraction(1, 2), R), mpmath.mpf)
    assert float(power(Fraction(1, 4), Fraction(1, 2), R)) == pytest.approx(0.5, rel=1e-15)
    assert power(Fraction(0), Fraction(1, 2), R) == 0


def test_root_rational_and_float():
    assert root(Fraction(9, 4), 1, R) == Fraction(9, 4)
    assert float(root(Fraction(9, 4), 2, R)) == pytest.approx(1.5, rel=1e-15)
    assert root(2.25, 2, F) == pytest.approx(1.5)


def test_float_policy():
    assert check_float_policy([1.0, -3e10])
    assert not check_float_policy([1e200])
    assert not check_float_policy([float("inf")])
