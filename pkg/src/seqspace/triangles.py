"""Triangle matrices of the space: A(r,s,t), the m-th difference, their composite and inverses."""
from __future__ import annotations

import sys
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .families import SequenceFamily, SpaceParams
from .numeric import (
    DimensionMismatch,
    LossOfPrecision,
    NumericMode,
    RangeError,
    SeqSpaceError,
    ValidationError,
    ZeroR,
    ZeroS0,
    ZeroT,
    as_mode,
    binomial,
    binomial_row,
    check_float_policy,
    fmt,
)

ORACLE_MAX_N = 8


class OracleScaleExceeded(SeqSpaceError, ValueError):
    pass


@dataclass(frozen=True)
class DCoefficients:
    """D_0, ..., D_N: the inverse of the Toeplitz triangle generated by s has
    entries (-1)^(n-k) D_(n-k)."""

    values: tuple
    mode: NumericMode
    overflow: bool = False
    error_estimate: float = 0.0

    def __getitem__(self, n: int):
        return self.values[n]

    def __len__(self) -> int:
        return len(self.values)

    @property
    def N(self) -> int:
        return len(self.values) - 1


def compute_d_coefficients(s: SequenceFamily, N: int, mode: NumericMode | str | None = None) -> DCoefficients:
    """D_n via the convolution recurrence sum_{k=0}^{n} (-1)^k D_k s_{n-k} = 0 (n >= 1).

    The recurrence is what B * A(e, s, e) = I says row by row; the literal
    determinant formula is kept as ``determinant_oracle_d`` for checking it.
    """
    mode = as_mode(mode)
    if N < 0:
        raise ValidationError("N must be >= 0")
    sv = s.terms(N + 1, mode)
    if sv[0] == 0:
        raise ZeroS0("s_0 must be nonzero")
    # c_n = (-1)^n D_n are the power-series coefficients of 1 / sum s_n z^n
    c = [mode.one() / sv[0]]
    for n in range(1, N + 1):
        acc = mode.zero()
        for k in range(n):
            acc += sv[n - k] * c[k]
        c.append(-acc / sv[0])
    values = tuple(ck if n % 2 == 0 else -ck for n, ck in enumerate(c))
    overflow = False
    estimate = 0.0
    if not mode.exact:
        if not check_float_policy(values):
            overflow = True
            warnings.warn("D coefficients exceed the float magnitude policy; results are unreliable",
                          RuntimeWarning, stacklevel=2)
        else:
            # growth of D past D_0 = 1/s_0 is lost to rounding at this relative rate
            estimate = sys.float_info.epsilon * max(abs(v) for v in values) * abs(sv[0])
            if estimate > mode.tol:
                warnings.warn(f"D coefficients reach {max(abs(v) for v in values):.3g}; float rounding "
                              f"error may reach {estimate:.3g} > tol {mode.tol:g}", LossOfPrecision, stacklevel=2)
    return DCoefficients(values, mode, overflow, estimate)


def _det(rows: list[list]):
    """Determinant by Gaussian elimination with row swaps; exact for Fractions."""
    a = [list(r) for r in rows]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    det = None
    for col in range(n):
        piv = max(range(col, n), key=lambda i: abs(a[i][col]))
        if a[piv][col] == 0:
            return a[0][0] * 0
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            sign = -sign
        pv = a[col][col]
        det = pv if det is None else det * pv
        for i in range(col + 1, n):
            f = a[i][col] / pv
            if f:
                for j in range(col, n):
                    a[i][j] -= f * a[col][j]
    return sign * det


def determinant_oracle_d(s: SequenceFamily, n: int, mode: NumericMode | str | None = None):
    """D_n from the literal n x n determinant divided by s_0^(n+1). Test-scale only."""
    mode = as_mode(mode)
    if n > ORACLE_MAX_N:
        raise OracleScaleExceeded(f"determinant oracle is limited to n <= {ORACLE_MAX_N}")
    if n < 0:
        raise ValidationError("n must be >= 0")
    sv = s.terms(n + 1, mode)
    if sv[0] == 0:
        raise ZeroS0("s_0 must be nonzero")
    if n == 0:
        return mode.one() / sv[0]
    # row i (0-based) reads s_{i+1}, s_i, ..., s_0, 0, ...
    mat = [[sv[i - j + 1] if i - j + 1 >= 0 else mode.zero() for j in range(n)] for i in range(n)]
    return _det(mat) / sv[0] ** (n + 1)


class TriangleMatrix:
    """Lower-triangular matrix on the window [0, N] given by a row generator.

    Rows are computed lazily and memoised; a row is a list of the entries
    k = 0..n.
    """

    def __init__(self, N: int, row_fn: Callable[[int], list], mode: NumericMode, tag: str = "generic",
                 meta: dict | None = None):
        if N < 0:
            raise ValidationError("N must be >= 0")
        self.N = N
        self.mode = mode
        self.tag = tag
        self.meta = dict(meta or {})
        self._row_fn = row_fn
        self._rows: dict[int, tuple] = {}

    def row(self, n: int) -> tuple:
        if not 0 <= n <= self.N:
            raise RangeError(f"row {n} outside window [0, {self.N}]")
        r = self._rows.get(n)
        if r is None:
            r = tuple(self._row_fn(n))
            if len(r) != n + 1:
                raise SeqSpaceError(f"row generator returned {len(r)} entries for row {n}")
            self._rows[n] = r
        return r

    def entry(self, n: int, k: int):
        if k > n:
            return self.mode.zero()
        return self.row(n)[k]

    def column(self, j: int) -> list:
        return [self.entry(n, j) for n in range(self.N + 1)]

    def dense(self) -> list[list]:
        z = self.mode.zero()
        return [list(self.row(n)) + [z] * (self.N - n) for n in range(self.N + 1)]

    def diagonal(self) -> list:
        return [self.row(n)[n] for n in range(self.N + 1)]

    def is_triangle(self) -> bool:
        return all(d != 0 for d in self.diagonal())

    def matvec(self, x: Sequence) -> list:
        if len(x) != self.N + 1:
            raise DimensionMismatch(f"vector of length {len(x)} for window of size {self.N + 1}")
        out = []
        for n in range(self.N + 1):
            acc = self.mode.zero()
            for k, v in enumerate(self.row(n)):
                if v:
                    acc += v * x[k]
            out.append(acc)
        return out

    def __matmul__(self, other: "TriangleMatrix") -> "TriangleMatrix":
        return matmul(self, other)

    def to_json(self) -> dict:
        header = {"N": self.N, "mode": self.mode.kind, "tol": self.mode.tol, "meta": {"tag": self.tag, **self.meta}}
        rows = [{"n": n, "entries": [[k, fmt(v)] for k, v in enumerate(self.row(n)) if v != 0]}
                for n in range(self.N + 1)]
        return {"header": header, "rows": rows}


def matmul(a: TriangleMatrix, b: TriangleMatrix) -> TriangleMatrix:
    """Product of two triangles on the same window (stays lower-triangular)."""
    if a.N != b.N:
        raise DimensionMismatch("windows differ")
    mode = a.mode

    def row(n: int) -> list:
        ra = a.row(n)
        out = [mode.zero()] * (n + 1)
        # accumulate row n of the product as a combination of rows of b
        for i in range(n + 1):
            u = ra[i]
            if u:
                for k, v in enumerate(b.row(i)):
                    if v:
                        out[k] += u * v
        return out

    return TriangleMatrix(a.N, row, mode, tag="product", meta={"factors": [a.tag, b.tag]})


def identity(N: int, mode: NumericMode | str | None = None) -> TriangleMatrix:
    mode = as_mode(mode)
    return TriangleMatrix(N, lambda n: [mode.zero()] * n + [mode.one()], mode, tag="identity")


def _nonzero_terms(fam: SequenceFamily, N: int, mode: NumericMode, err, name: str) -> list:
    vals = fam.terms(N + 1, mode)
    for n, v in enumerate(vals):
        if v == 0:
            raise err(f"{name}_{n} = 0")
    return vals


def build_A(r: SequenceFamily, s: SequenceFamily, t: SequenceFamily, N: int,
            mode: NumericMode | str | None = None) -> TriangleMatrix:
    """Generalized means: entry (n, k) = s_{n-k} t_k / r_n for k <= n."""
    mode = as_mode(mode)
    rv = _nonzero_terms(r, N, mode, ZeroR, "r")
    tv = _nonzero_terms(t, N, mode, ZeroT, "t")
    sv = s.terms(N + 1, mode)
    if sv[0] == 0:
        raise ZeroS0("s_0 must be nonzero")
    return TriangleMatrix(N, lambda n: [sv[n - k] * tv[k] / rv[n] for k in range(n + 1)], mode, tag="A")


def build_inverse_A(r: SequenceFamily, s: SequenceFamily, t: SequenceFamily, N: int,
                    mode: NumericMode | str | None = None) -> TriangleMatrix:
    """Inverse of A(r,s,t): entry (n, k) = (-1)^(n-k) D_{n-k} r_k / t_n."""
    mode = as_mode(mode)
    rv = _nonzero_terms(r, N, mode, ZeroR, "r")
    tv = _nonzero_terms(t, N, mode, ZeroT, "t")
    D = compute_d_coefficients(s, N, mode)

    def row(n: int) -> list:
        return [(D[n - k] if (n - k) % 2 == 0 else -D[n - k]) * rv[k] / tv[n] for k in range(n + 1)]

    return TriangleMatrix(N, row, mode, tag="inverse-A")


def build_delta(m: int, N: int, mode: NumericMode | str | None = None) -> TriangleMatrix:
    """m-th order difference: entry (n, k) = (-1)^(n-k) C(m, n-k) for n-m <= k <= n."""
    mode = as_mode(mode)
    if not isinstance(m, int) or m < 1:
        raise ValidationError("m must be a positive integer")
    coef = [binomial(m, q, mode) * (-1) ** q for q in range(m + 1)]

    def row(n: int) -> list:
        return [coef[n - k] if n - k <= m else mode.zero() for k in range(n + 1)]

    return TriangleMatrix(N, row, mode, tag="Delta", meta={"m": m})


def build_summation_power(m: int, N: int, mode: NumericMode | str | None = None) -> TriangleMatrix:
    """Inverse of the m-th difference: entry (n, k) = C(m + n - k - 1, n - k)."""
    mode = as_mode(mode)
    c = binomial_row(m - 1, N + 1, mode)
    return TriangleMatrix(N, lambda n: [c[n - k] for k in range(n + 1)], mode, tag="inverse-Delta", meta={"m": m})


def build_composite(params: SpaceParams, N: int, mode: NumericMode | str | None = None) -> TriangleMatrix:
    """A(r,s,t) * Delta^(m) written out entrywise:

        (n, j) -> (1/r_n) sum_{i=j}^{n} (-1)^(i-j) C(m, i-j) s_{n-i} t_i
    """
    mode = as_mode(mode)
    m = params.m
    rv = _nonzero_terms(params.r, N, mode, ZeroR, "r")
    tv = _nonzero_terms(params.t, N, mode, ZeroT, "t")
    sv = params.s.terms(N + 1, mode)
    if sv[0] == 0:
        raise ZeroS0("s_0 must be nonzero")
    coef = [binomial(m, q, mode) * (-1) ** q for q in range(m + 1)]

    def row(n: int) -> list:
        out = []
        for j in range(n + 1):
            acc = mode.zero()
            for i in range(j, min(n, j + m) + 1):
                acc += coef[i - j] * sv[n - i] * tv[i]
            out.append(acc / rv[n])
        return out

    return TriangleMatrix(N, row, mode, tag="composite", meta=params.to_json())


def build_inverse_composite(params: SpaceParams, N: int, mode: NumericMode | str | None = None) -> TriangleMatrix:
    """Inverse of the composite:

        (n, j) -> sum_{k=j}^{n} (-1)^(k-j) C(m+n-k-1, n-k) D_{k-j} r_j / t_k

    Column j is the basis vector b^(j).
    """
    mode = as_mode(mode)
    rv = _nonzero_terms(params.r, N, mode, ZeroR, "r")
    tv = _nonzero_terms(params.t, N, mode, ZeroT, "t")
    D = compute_d_coefficients(params.s, N, mode)
    sd = [D[q] if q % 2 == 0 else -D[q] for q in range(N + 1)]
    m = params.m
    # level 0 holds rows of the inverse of A(r,s,t); level l+1 is the running
    # row sum of level l, so level m is S^m times that inverse, i.e. the double sum above
    levels: list[list[list]] = [[] for _ in range(m + 1)]

    def base_row(i: int) -> list:
        return [sd[i - k] * rv[k] / tv[i] for k in range(i + 1)]

    def row(n: int) -> list:
        while len(levels[m]) <= n:
            i = len(levels[m])
            levels[0].append(base_row(i))
            for lev in range(1, m + 1):
                prev = levels[lev][i - 1] if i else []
                below = levels[lev - 1][i]
                levels[lev].append([(prev[k] if k < i else mode.zero()) + below[k] for k in range(i + 1)])
        return levels[m][n]

    return TriangleMatrix(N, row, mode, tag="inverse-composite", meta=params.to_json())


def max_abs_deviation_from_identity(mat: TriangleMatrix) -> float:
    worst = 0.0
    for n in range(mat.N + 1):
        for k, v in enumerate(mat.row(n)):
            target = 1 if k == n else 0
            worst = max(worst, abs(float(v - target)))
    return worst
