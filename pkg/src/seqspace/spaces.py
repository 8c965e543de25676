"""The space itself: transform onto l(p), its inverse, paranorm, BK norm and Schauder basis."""
from __future__ import annotations

from contextlib import nullcontext
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

from .families import ExponentSequence, SpaceParams
from .numeric import (
    BadExponent,
    DimensionMismatch,
    NumericMode,
    RangeError,
    ValidationError,
    ZeroR,
    ZeroT,
    as_mode,
    binomial,
    power,
    precise,
    root,
    to_fraction,
)
from .triangles import compute_d_coefficients


def _window_terms(params: SpaceParams, N: int, mode: NumericMode):
    rv = params.r.terms(N + 1, mode)
    tv = params.t.terms(N + 1, mode)
    for n in range(N + 1):
        if rv[n] == 0:
            raise ZeroR(f"r_{n} = 0")
        if tv[n] == 0:
            raise ZeroT(f"t_{n} = 0")
    return rv, params.s.terms(N + 1, mode), tv


def difference(x: Sequence, m: int, mode: NumericMode) -> list:
    """Apply the first difference (x_n - x_{n-1}, with x_{-1} = 0) m times."""
    z = list(x)
    for _ in range(m):
        z = [z[0]] + [z[n] - z[n - 1] for n in range(1, len(z))]
    return z


def summation(x: Sequence, m: int, mode: NumericMode) -> list:
    """Apply the partial-sum operator m times (inverse of ``difference``)."""
    z = list(x)
    for _ in range(m):
        acc = mode.zero()
        out = []
        for v in z:
            acc += v
            out.append(acc)
        z = out
    return z


def forward_transform(x: Sequence, params: SpaceParams, mode: NumericMode | str | None = None) -> list:
    """y = A(r,s,t) Delta^(m) x on the window [0, len(x) - 1]."""
    mode = as_mode(mode)
    if len(x) == 0:
        raise DimensionMismatch("empty vector")
    N = len(x) - 1
    x = mode.vec(x)
    rv, sv, tv = _window_terms(params, N, mode)
    z = difference(x, params.m, mode)
    tz = [tv[k] * z[k] for k in range(N + 1)]
    y = []
    for n in range(N + 1):
        acc = mode.zero()
        for k in range(n + 1):
            sk = sv[n - k]
            if sk:
                acc += sk * tz[k]
        y.append(acc / rv[n])
    return y


def inverse_transform(y: Sequence, params: SpaceParams, mode: NumericMode | str | None = None) -> list:
    """x_n = sum_{j<=n} sum_{k=j}^{n} (-1)^(k-j) C(m+n-k-1, n-k) D_{k-j} r_j y_j / t_k.

    Evaluated as the inverse of A(r,s,t) followed by m partial-sum passes,
    which is the same double sum regrouped.
    """
    mode = as_mode(mode)
    if len(y) == 0:
        raise DimensionMismatch("empty vector")
    N = len(y) - 1
    y = mode.vec(y)
    rv, _, tv = _window_terms(params, N, mode)
    D = compute_d_coefficients(params.s, N, mode)
    ry = [rv[j] * y[j] for j in range(N + 1)]
    w = []
    for k in range(N + 1):
        acc = mode.zero()
        for j in range(k + 1):
            d = D[k - j]
            if d:
                acc += (d if (k - j) % 2 == 0 else -d) * ry[j]
        w.append(acc / tv[k])
    return summation(w, params.m, mode)


@dataclass(frozen=True)
class SpaceElement:
    """A coefficient vector x on [0, N] together with its space."""

    x: tuple
    params: SpaceParams
    mode: NumericMode

    @classmethod
    def of(cls, x: Sequence, params: SpaceParams, mode: NumericMode | str | None = None) -> "SpaceElement":
        mode = as_mode(mode)
        return cls(tuple(mode.vec(x)), params, mode)

    @property
    def N(self) -> int:
        return len(self.x) - 1

    @cached_property
    def y(self) -> tuple:
        return tuple(forward_transform(self.x, self.params, self.mode))


@dataclass(frozen=True)
class ParanormResult:
    value: object
    last_term: object
    power_sum: object
    N: int
    mode: str

    def __float__(self) -> float:
        return float(self.value)

    def truncation_ok(self, rel: float = 1e-12) -> bool:
        return float(self.last_term) <= rel * float(self.value) or float(self.value) == 0


def _power_sum(y: Sequence, p: ExponentSequence, mode: NumericMode):
    terms = [power(v, p[n], mode) for n, v in enumerate(y)]
    if mode.exact:
        with precise():
            total = sum(terms[1:], terms[0])
    else:
        total = sum(terms)
    return total, terms[-1]


def paranorm_of_image(y: Sequence, p: ExponentSequence, mode: NumericMode | str | None = None) -> ParanormResult:
    """(sum_n |y_n|^{p_n})^{1/M} for an already transformed vector."""
    mode = as_mode(mode)
    y = mode.vec(y)
    total, last = _power_sum(y, p, mode)
    M = p.M
    value = root(total, M, mode)
    return ParanormResult(value, last, total, len(y) - 1, mode.kind)


def paranorm(x, params: SpaceParams, mode: NumericMode | str | None = None) -> ParanormResult:
    """Paranorm of x: the l(p) paranorm of its transform, plus the last summand
    so callers can judge whether the window [0, N] is long enough."""
    if isinstance(x, SpaceElement):
        return paranorm_of_image(x.y, params.p, x.mode)
    mode = as_mode(mode)
    return paranorm_of_image(forward_transform(x, params, mode), params.p, mode)


def lp_norm(y: Sequence, p, mode: NumericMode | str | None = None):
    mode = as_mode(mode)
    p = to_fraction(p) if mode.exact else float(p)
    if p < 1:
        raise BadExponent(f"l_p norm needs p >= 1, got {p}")
    y = mode.vec(y)
    if mode.exact:
        with precise():
            terms = [power(v, p, mode) for v in y]
            total = sum(terms[1:], terms[0])
            return root(total, p, mode)
    return sum(abs(v) ** p for v in y) ** (1.0 / p)


def bk_norm(x: Sequence, params: SpaceParams, p=None, mode: NumericMode | str | None = None):
    """||x|| = ||y||_p for constant p >= 1 (defaults to the params' exponent)."""
    if p is None:
        if not params.p.is_constant:
            raise BadExponent("the BK norm needs a constant exponent")
        p = params.p.tail_value
    return lp_norm(forward_transform(x, params, mode), p, mode)


@dataclass(frozen=True)
class BasisVector:
    j: int
    b: tuple

    def __len__(self) -> int:
        return len(self.b)


def basis_vector(j: int, params: SpaceParams, N: int, mode: NumericMode | str | None = None) -> BasisVector:
    """b^(j)_n = sum_{k=j}^{n} (-1)^(k-j) C(m+n-k-1, n-k) D_{k-j} r_j / t_k, zero for n < j."""
    mode = as_mode(mode)
    if not 0 <= j <= N:
        raise RangeError(f"basis index {j} outside [0, {N}]")
    rv, _, tv = _window_terms(params, N, mode)
    D = compute_d_coefficients(params.s, N, mode)
    m = params.m
    b = []
    for n in range(N + 1):
        if n < j:
            b.append(mode.zero())
            continue
        acc = mode.zero()
        for k in range(j, n + 1):
            d = D[k - j]
            if d:
                term = binomial(m + n - k - 1, n - k, mode) * d / tv[k]
                acc += term if (k - j) % 2 == 0 else -term
        b.append(acc * rv[j])
    return BasisVector(j, tuple(b))


@dataclass(frozen=True)
class Reconstruction:
    partial: tuple
    remainder: object
    J: int


def reconstruct(x, params: SpaceParams, J: int, mode: NumericMode | str | None = None) -> Reconstruction:
    """Partial basis expansion sum_{j<=J} mu_j b^(j) with mu = transform of x,
    and the paranorm of what is left over."""
    elem = x if isinstance(x, SpaceElement) else SpaceElement.of(x, params, mode)
    mode = elem.mode
    if not 0 <= J <= elem.N:
        raise ValidationError(f"J = {J} outside [0, {elem.N}]")
    mu = list(elem.y[: J + 1]) + [mode.zero()] * (elem.N - J)
    partial = inverse_transform(mu, params, mode)
    rest = [a - b for a, b in zip(elem.x, partial)]
    return Reconstruction(tuple(partial), paranorm(rest, params, mode).value, J)


def remainder_curve(x, params: SpaceParams, mode: NumericMode | str | None = None) -> list:
    """Remainder paranorm for every J = 0..N at once.

    The transform of x minus its J-th partial expansion is y with entries
    0..J cleared, so the whole curve costs one transform.
    """
    elem = x if isinstance(x, SpaceElement) else SpaceElement.of(x, params, mode)
    mode = elem.mode
    p = params.p
    terms = [power(v, p[n], mode) for n, v in enumerate(elem.y)]
    out = []
    with precise() if mode.exact else nullcontext():
        tail = terms[0] * 0
        tails = []
        for v in reversed(terms):
            tails.append(tail)
            tail = tail + v
        tails.reverse()
        for J in range(elem.N + 1):
            out.append(root(tails[J], p.M, mode))
    return out
