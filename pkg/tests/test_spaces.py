from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_params, random_vector
from seqspace.families import ExponentSequence, SequenceFamily, SpaceParams, cesaro_alpha, identity_params
from seqspace.numeric import BadExponent, DimensionMismatch, RangeError, ValidationError
from seqspace.spaces import (
    SpaceElement,
    basis_vector,
    bk_norm,
    difference,
    forward_transform,
    inverse_transform,
    lp_norm,
    paranorm,
    reconstruct,
    remainder_curve,
    summation,
)
from seqspace.triangles import build_composite, build_inverse_composite
from seqspace.numeric import NumericMode

R = NumericMode("rational")
fractions = st.fractions(min_value=-20, max_value=20, max_denominator=7)


def test_identity_transform_is_identity():
    P = identity_params(2)
    assert forward_transform([1, 2, 3], P) == [1, 2, 3]
    assert inverse_transform([1, 2, 3], P) == [1, 2, 3]


def test_forward_matches_dense_composite(rng):
    P = random_params(rng, 12)
    x = random_vector(rng, 12)
    assert forward_transform(x, P) == build_composite(P, 12).matvec(x)
    y = random_vector(rng, 12)
    assert inverse_transform(y, P) == build_inverse_composite(P, 12).matvec(y)


@settings(max_examples=40, deadline=None)
@given(st.lists(fractions, min_size=1, max_size=12), st.integers(1, 3))
def test_roundtrip_property(x, m):
    P = cesaro_alpha(m=m, p=2)
    assert inverse_transform(forward_transform(x, P), P) == x
    assert forward_transform(inverse_transform(x, P), P) == x


@settings(max_examples=30, deadline=None)
@given(st.lists(fractions, min_size=1, max_size=10), st.integers(1, 4))
def test_difference_and_summation_are_inverse(x, m):
    assert summation(difference(x, m, R), m, R) == x


def test_paranorm_geometric_identity_params():
    P = identity_params(1)
    x = [Fraction(1, 2 ** k) for k in range(41)]
    res = paranorm(x, P)
    assert res.value == 2 - Fraction(1, 2 ** 40)
    assert res.last_term == Fraction(1, 2 ** 40)


def test_paranorm_uses_M_root():
    P = identity_params(2)
    res = paranorm([3, 4], P)
    assert float(res.value) == pytest.approx(5.0, rel=1e-15)
    # p_k <= 1 everywhere: M = 1, no root
    Q = identity_params(Fraction(1, 2))
    assert float(paranorm([4, 9], Q).value) == pytest.approx(5.0, rel=1e-15)


def test_paranorm_variable_exponent():
    p = ExponentSequence((1, 2, 3), tail_value=3)
    P = SpaceParams(SequenceFamily.ones(), SequenceFamily.ones(), SequenceFamily.ones(), 1, p)
    res = paranorm([1, 1, 2], P)
    assert float(res.value) == pytest.approx(10 ** (1 / 3), rel=1e-14)


def test_paranorm_zero_and_truncation_flag():
    P = identity_params(2)
    assert paranorm([0, 0], P).value == 0
    assert paranorm([0, 0], P).truncation_ok()
    assert not paranorm([1, 1], P).truncation_ok()


def test_bk_norm_and_isometry(rng):
    P = identity_params(2)
    assert float(bk_norm([3, 4], P)) == pytest.approx(5.0, rel=1e-15)
    Q = random_params(rng, 10, p=3)
    x = random_vector(rng, 10)
    assert bk_norm(x, Q) == lp_norm(forward_transform(x, Q), 3)


def test_norm_errors():
    with pytest.raises(BadExponent):
        lp_norm([1, 2], Fraction(1, 2))
    p = ExponentSequence((1, 2), tail_value=2)
    P = SpaceParams(SequenceFamily.ones(), SequenceFamily.ones(), SequenceFamily.ones(), 1, p)
    with pytest.raises(BadExponent):
        bk_norm([1, 2], P)
    with pytest.raises(DimensionMismatch):
        forward_transform([], P)


def test_basis_vector_identity_params_is_unit():
    P = identity_params()
    assert basis_vector(2, P, 4).b == (0, 0, 1, 0, 0)
    with pytest.raises(RangeError):
        basis_vector(5, P, 4)


def test_basis_vector_weighted_mean_two_terms():
    # with s = e only D_0 = D_1 = 1 survive, so b^(j)_n has at most two terms
    from seqspace.families import weighted_mean
    u = SequenceFamily.explicit([2, 3, 5, 7, 11])
    v = SequenceFamily.explicit([1, 2, 3, 4, 5])
    P = weighted_mean(u, v, m=2)
    b = basis_vector(1, P, 4).b
    expected = [0, Fraction(1, 3 * 2)]
    for n in range(2, 5):
        expected.append(Fraction(n, 3 * 2) - Fraction(n - 1, 3 * 3))
    assert list(b) == expected


def test_basis_vectors_are_columns_of_inverse(rng):
    P = random_params(rng, 9)
    B = build_inverse_composite(P, 9)
    for j in range(10):
        assert list(basis_vector(j, P, 9).b) == B.column(j)


def test_basis_maps_to_unit_vectors(rng):
    P = random_params(rng, 8)
    for j in range(9):
        y = forward_transform(list(basis_vector(j, P, 8).b), P)
        assert y == [1 if n == j else 0 for n in range(9)]


def test_reconstruct_geometric():
    P = identity_params(1)
    x = [Fraction(1, 2 ** k) for k in range(12)]
    rec = reconstruct(x, P, 10)
    assert rec.remainder == Fraction(1, 2 ** 11)
    assert list(rec.partial[:11]) == x[:11] and rec.partial[11] == 0
    with pytest.raises(ValidationError):
        reconstruct(x, P, 12)


def test_remainder_curve_matches_reconstruct(rng):
    P = random_params(rng, 8, p=2)
    x = random_vector(rng, 8)
    elem = SpaceElement.of(x, P)
    curve = remainder_curve(elem, P)
    for J in (0, 3, 8):
        assert float(curve[J]) == pytest.approx(float(reconstruct(elem, P, J).remainder), rel=1e-30, abs=0)
    assert curve[-1] == 0
    assert [float(c) for c in curve] == sorted((float(c) for c in curve), reverse=True)
