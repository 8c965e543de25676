"""Operators on the normed space (constant p >= 1): associated matrix, norms,
Hausdorff measure of noncompactness and compactness classification.

An operator is given row by row. Each row must say how its infinite tail
behaves: either it is finitely supported, or it carries a geometric decay
certificate |a_j| <= scale * ratio^j, or it is a bare term function whose
partial sums are only probed (and rejected when they fail to settle).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .families import SequenceFamily, SpaceParams, family_from_json
from .numeric import (
    BadExponent,
    DimensionMismatch,
    NumericMode,
    RangeError,
    SeriesDivergence,
    ValidationError,
    ZeroR,
    ZeroT,
    as_mode,
    to_fraction,
)
from .triangles import compute_d_coefficients

TARGETS = ("c0", "c", "linf", "lq", "l1", "bv")
QUALITY_LIMIT = 0.1
MAX_CUTOFF = 4096
EXTRAPOLATION_POINTS = 4


class PlateauNotReached(UserWarning):
    pass


# -- row descriptors --------------------------------------------------------

@dataclass(frozen=True)
class FiniteRow:
    entries: Mapping[int, Any]

    @property
    def extent(self) -> int:
        nz = [j for j, v in self.entries.items() if v != 0]
        return max(nz) if nz else -1


@dataclass(frozen=True)
class GeometricRow:
    """A row with |a_j| <= scale * ratio^j for every j."""

    term: Callable[[int], Any]
    ratio: float
    scale: float = 1.0

    def __post_init__(self):
        if not 0 <= self.ratio < 1:
            raise ValidationError(f"decay ratio must lie in [0, 1), got {self.ratio}")
        if self.scale < 0:
            raise ValidationError("decay scale must be nonnegative")


@dataclass(frozen=True)
class SeriesRow:
    """A row with no decay certificate; its j-sums are accepted only if they visibly settle."""

    term: Callable[[int], Any]


ZERO_ROW = FiniteRow({})


def _normalise_target(target: str) -> str:
    t = target.lower().replace("_", "").replace("-", "")
    t = {"linfty": "linf", "lp": "lq"}.get(t, t)
    if t not in TARGETS:
        raise ValidationError(f"unknown target {target!r}; expected one of {TARGETS}")
    return t


@dataclass(frozen=True)
class OperatorSpec:
    """A matrix operator A = (a_nj) acting on the space with source exponent p.

    ``nrows`` set means rows n >= nrows are zero, i.e. finite rank.
    """

    row: Callable[[int], FiniteRow | GeometricRow | SeriesRow] = field(compare=False)
    p: Fraction
    target: str
    q: Fraction | None = None
    nrows: int | None = None
    label: str = ""

    def __post_init__(self):
        p = to_fraction(self.p)
        if not 1 <= p:
            raise BadExponent(f"source exponent must satisfy 1 <= p < inf, got {p}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "target", _normalise_target(self.target))
        if self.q is not None:
            q = to_fraction(self.q)
            if q < 1:
                raise BadExponent(f"target exponent q must be >= 1, got {q}")
            object.__setattr__(self, "q", q)
        if self.target == "lq" and self.q is None:
            raise ValidationError("target lq needs q")

    def row_at(self, n: int):
        if self.nrows is not None and n >= self.nrows:
            return ZERO_ROW
        return self.row(n)

    @property
    def conjugate(self) -> float:
        if self.p == 1:
            raise BadExponent("p = 1 has conjugate infinity; use l1_norm / bv_norm")
        return float(self.p / (self.p - 1))

    @property
    def finite_rank(self) -> bool:
        return self.nrows is not None

    def with_target(self, target: str, q=None) -> "OperatorSpec":
        return OperatorSpec(self.row, self.p, target, q, self.nrows, self.label)

    @classmethod
    def dense(cls, rows: Sequence[Sequence], p, target: str, q=None, label: str = "dense") -> "OperatorSpec":
        finite = tuple(FiniteRow({j: v for j, v in enumerate(r) if v != 0}) for r in rows)
        return cls(lambda n: finite[n], p, target, q, len(finite), label)

    @classmethod
    def sparse(cls, entries: Sequence[tuple[int, int, Any]], p, target: str, q=None,
               label: str = "sparse") -> "OperatorSpec":
        by_row: dict[int, dict[int, Any]] = {}
        for n, j, v in entries:
            if n < 0 or j < 0:
                raise ValidationError("sparse indices must be nonnegative")
            by_row.setdefault(int(n), {})[int(j)] = v
        nrows = max(by_row) + 1 if by_row else 0
        rows = {n: FiniteRow(e) for n, e in by_row.items()}
        return cls(lambda n: rows.get(n, ZERO_ROW), p, target, q, nrows, label)

    @classmethod
    def separable(cls, u: SequenceFamily, v: Sequence | None = None, p=2, target: str = "c0", q=None,
                  ratio: float | None = None, scale: float = 1.0, v_term: Callable[[int], Any] | None = None,
                  nrows: int | None = None, label: str = "separable") -> "OperatorSpec":
        """a_nj = u_n v_j with v either a finite list or a geometric-decay term function."""
        if v is not None:
            base = {j: x for j, x in enumerate(v) if x != 0}

            def row(n):
                un = u.term(n)
                return FiniteRow({j: un * x for j, x in base.items()})
        elif v_term is not None and ratio is not None:
            def row(n):
                un = u.term(n)
                return GeometricRow(lambda j: un * v_term(j), ratio, abs(float(un)) * scale)
        else:
            raise ValidationError("separable operator needs v values or (v_term, ratio)")
        return cls(row, p, target, q, nrows, label)


def operator_from_json(obj: Mapping[str, Any]) -> OperatorSpec:
    """Kinds: ``dense`` (rows), ``sparse`` ([n, j, v] triples), ``separable``
    (u family, v values or {"scale", "ratio"} geometric)."""
    kind = obj.get("kind", "dense")
    p = obj.get("p", 2)
    target = obj.get("target", "c0")
    q = obj.get("q")
    if kind == "dense":
        return OperatorSpec.dense([[to_fraction(x) for x in r] for r in obj["rows"]], p, target, q)
    if kind == "sparse":
        return OperatorSpec.sparse([(n, j, to_fraction(v)) for n, j, v in obj["entries"]], p, target, q)
    if kind == "separable":
        u = family_from_json(obj.get("u", {"constant": 1}))
        v = obj["v"]
        nrows = obj.get("nrows")
        if isinstance(v, Mapping) and "ratio" in v:
            ratio = to_fraction(v["ratio"])
            sc = to_fraction(v.get("scale", 1))
            return OperatorSpec.separable(u, None, p, target, q, ratio=float(ratio), scale=float(abs(sc)),
                                          v_term=lambda j: sc * ratio ** j, nrows=nrows)
        vals = v["values"] if isinstance(v, Mapping) else v
        return OperatorSpec.separable(u, [to_fraction(x) for x in vals], p, target, q, nrows=nrows)
    raise ValidationError(f"unknown operator kind {kind!r}")


# -- the associated matrix --------------------------------------------------

class _Kernel:
    """r_k, t_k and the signed D-weights (-1)^q D_q, grown on demand."""

    def __init__(self, params: SpaceParams, mode: NumericMode):
        self.params = params
        self.mode = mode
        self.size = 0

    def _grow(self, size: int):
        mode, P = self.mode, self.params
        self.r = P.r.terms(size, mode)
        self.t = P.t.terms(size, mode)
        for k in range(size):
            if self.r[k] == 0:
                raise ZeroR(f"r_{k} = 0")
            if self.t[k] == 0:
                raise ZeroT(f"t_{k} = 0")
        D = compute_d_coefficients(P.s, size - 1, mode)
        self.sd = [D[q] if q % 2 == 0 else -D[q] for q in range(size)]
        self.nz = [q for q in range(size) if self.sd[q] != 0]
        if not mode.exact:
            self.r_arr = np.array(self.r, dtype=float)
            self.t_arr = np.array(self.t, dtype=float)
            self.sd_arr = np.array(self.sd, dtype=float)
        self.size = size

    def ensure(self, J: int):
        if J + 1 > self.size:
            try:
                self._grow(max(J + 1, 2 * self.size))
            except RangeError:
                # explicit prefixes: take exactly what is needed
                self._grow(J + 1)

    def amplification(self, J: int) -> float:
        """max_k |r_k| sum_q |D_q| / |t_{k+q}| over the cutoff range; error gain of a w-perturbation."""
        self.ensure(J)
        r = np.abs(np.array(self.r[: J + 1], dtype=float))
        tinv = 1 / np.abs(np.array(self.t[: J + 1], dtype=float))
        d = np.abs(np.array(self.sd[: J + 1], dtype=float))
        g = np.convolve(tinv[::-1], d)[: J + 1][::-1]
        return float((r * g).max())

    def transform(self, a: list) -> list:
        """ã_k = r_k sum_{i>=k} (-1)^(i-k) D_{i-k} w_i / t_i with w = (S^T)^m a.

        This is the three-term bracket of the associated sequence with its
        pieces merged: the a_k/(s_0 t_k) term and the j >= k+1 sums for i = k
        add up to D_0 w_k / t_k, and the i = k+1 and i >= k+2 pieces are the
        remaining terms of the same correlation.
        """
        J = len(a) - 1
        if J < 0:
            return []
        self.ensure(J)
        m = self.params.m
        mode = self.mode
        if mode.exact:
            w = list(a)
            for _ in range(m):
                acc = mode.zero()
                for i in range(J, -1, -1):
                    acc += w[i]
                    w[i] = acc
            u = [w[i] / self.t[i] for i in range(J + 1)]
            out = []
            for k in range(J + 1):
                acc = mode.zero()
                for q in self.nz:
                    if k + q > J:
                        break
                    if u[k + q]:
                        acc += self.sd[q] * u[k + q]
                out.append(self.r[k] * acc)
            return out
        w = np.array(a, dtype=float)
        for _ in range(m):
            w = np.cumsum(w[::-1])[::-1]
        u = w / self.t_arr[: J + 1]
        g = np.convolve(u[::-1], self.sd_arr[: J + 1])[: J + 1][::-1]
        return list(self.r_arr[: J + 1] * g)


def _tail_bound(scale: float, ratio: float, J: int, m: int) -> float:
    """Bound on sum_{j>J} C(m+j-i-1, j-i) |a_j| for |a_j| <= scale ratio^j."""
    if scale == 0 or ratio == 0:
        return 0.0
    return scale * ratio ** (J + 1) * (J + 1 + m) ** (m - 1) / (1 - ratio) ** m


@dataclass
class AssociatedMatrix:
    """Rows ã_n on n = 0..N; rows may run past column N when the source row does."""

    rows: list[list]
    mode: NumericMode
    convergenceFlags: list[str]
    errorBudget: float = 0.0
    alphaTilde: list | None = None

    @property
    def N(self) -> int:
        return len(self.rows) - 1

    @property
    def width(self) -> int:
        return max((len(r) for r in self.rows), default=0)

    def dense(self, width: int | None = None) -> list[list]:
        w = self.width if width is None else width
        z = self.mode.zero()
        return [list(r[:w]) + [z] * (w - len(r)) for r in self.rows]

    def to_array(self, width: int | None = None) -> np.ndarray:
        return np.array([[float(v) for v in r] for r in self.dense(width)], dtype=float).reshape(
            len(self.rows), self.width if width is None else width)

    @classmethod
    def from_entries(cls, rows: Sequence[Sequence], mode: NumericMode | str | None = None) -> "AssociatedMatrix":
        mode = as_mode(mode)
        return cls([mode.vec(r) for r in rows], mode, ["exact"] * len(rows))


def associated_row(row, kernel: _Kernel, N: int, tol: float) -> tuple[list, str, float]:
    mode = kernel.mode
    m = kernel.params.m
    if isinstance(row, FiniteRow):
        J = row.extent
        a = [mode.zero()] * (J + 1)
        for j, v in row.entries.items():
            if v != 0:
                a[j] = mode.num(v)
        return kernel.transform(a), "exact", 0.0

    if isinstance(row, GeometricRow):
        J = N
        while True:
            budget = _tail_bound(row.scale, row.ratio, J, m) * kernel.amplification(J)
            if budget <= tol:
                break
            J += 8
            if J > MAX_CUTOFF + N:
                raise SeriesDivergence(
                    f"geometric row needs a cutoff beyond {MAX_CUTOFF + N} to reach tol={tol}")
        vals = kernel.transform([mode.num(row.term(j)) for j in range(J + 1)])
        longer = kernel.transform([mode.num(row.term(j)) for j in range(J + 17)])
        drift = max((abs(float(x) - float(y)) for x, y in zip(vals, longer)), default=0.0)
        if drift > max(10 * budget, tol):
            raise SeriesDivergence(f"decay certificate contradicted: cutoff drift {drift:.3e}")
        return vals, "truncated", budget

    if isinstance(row, SeriesRow):
        J1, J2 = 2 * N + 16, 4 * N + 32
        a1 = kernel.transform([mode.num(row.term(j)) for j in range(J1 + 1)])
        a2 = kernel.transform([mode.num(row.term(j)) for j in range(J2 + 1)])
        drift = max(abs(float(x) - float(y)) for x, y in zip(a1, a2))
        if not np.isfinite(drift) or drift > tol:
            raise SeriesDivergence(f"j-sums did not settle between cutoffs {J1} and {J2} (drift {drift:.3e})")
        return a2, "probed", drift
    raise ValidationError(f"unsupported row descriptor {type(row).__name__}")


def associated_matrix(A: OperatorSpec, params: SpaceParams, N: int, tol: float = 1e-12,
                      mode: NumericMode | str | None = "float") -> AssociatedMatrix:
    """ã_nk for n = 0..N, so that (A x)_n = (Ã y)_n with y the transform of x."""
    mode = as_mode(mode)
    if N < 0:
        raise ValidationError("N must be >= 0")
    kernel = _Kernel(params, mode)
    rows, flags, budget = [], [], 0.0
    for n in range(N + 1):
        vals, flag, err = associated_row(A.row_at(n), kernel, N, tol)
        rows.append(vals)
        flags.append(flag)
        budget = max(budget, err)
    return AssociatedMatrix(rows, mode, flags, budget)


def associated_sequence(a: Sequence, params: SpaceParams, mode: NumericMode | str | None = None) -> list:
    """ã for one finitely supported sequence a (the dual-norm representer)."""
    mode = as_mode(mode)
    return _Kernel(params, mode).transform(mode.vec(a))


def _resolve(A, params: SpaceParams | None, N: int | None, tol: float, mode) -> AssociatedMatrix:
    if isinstance(A, AssociatedMatrix):
        return A
    if params is None or N is None:
        raise ValidationError("an OperatorSpec needs params and N")
    return associated_matrix(A, params, N, tol, mode)


# -- norms --------------------------------------------------------------------

def row_norms(At: AssociatedMatrix, conj: float, alpha: np.ndarray | None = None) -> np.ndarray:
    arr = At.to_array()
    if alpha is not None:
        arr = arr - alpha[None, : arr.shape[1]]
    if arr.size == 0:
        return np.zeros(len(At.rows))
    return (np.abs(arr) ** conj).sum(axis=1) ** (1 / conj)


def operator_norm(A: OperatorSpec, params: SpaceParams, N: int, tol: float = 1e-12,
                  mode: NumericMode | str | None = "float") -> float:
    """sup_{n<=N} (sum_k |ã_nk|^{p'})^{1/p'} for 1 < p < inf."""
    if A.target not in ("c0", "c", "linf"):
        raise ValidationError(f"the row-norm formula covers targets c0, c, linf, not {A.target}")
    conj = A.conjugate
    At = associated_matrix(A, params, N, tol, mode)
    norms = row_norms(At, conj)
    return float(norms.max()) if norms.size else 0.0


def l1_norm(A, params: SpaceParams | None = None, N: int | None = None, tol: float = 1e-12,
            mode: NumericMode | str | None = None):
    """max_k sum_{n<=N} |ã_nk|; exact in rational mode."""
    At = _resolve(A, params, N, tol, mode)
    dense = At.dense()
    if not dense or not dense[0]:
        return At.mode.zero()
    return max(sum(abs(row[k]) for row in dense) for k in range(len(dense[0])))


def bv_norm(A, params: SpaceParams | None = None, N: int | None = None, tol: float = 1e-12,
            mode: NumericMode | str | None = None):
    """max_k sum_{n<=N} |ã_{n-1,k} - ã_{n,k}| with the row above n = 0 taken as zero."""
    At = _resolve(A, params, N, tol, mode)
    dense = At.dense()
    if not dense or not dense[0]:
        return At.mode.zero()
    z = At.mode.zero()
    best = z
    for k in range(len(dense[0])):
        prev, total = z, z
        for row in dense:
            total += abs(prev - row[k])
            prev = row[k]
        best = max(best, total)
    return best


# -- Hausdorff measure of noncompactness ------------------------------------

def _limit_at_infinity(values: Sequence[float], idx: Sequence[int]) -> float:
    """Polynomial extrapolation in h = 1/(n+1) to h = 0 through (h_j, values_j).

    Exact for sequences L + c_1 h + ... + c_{K-1} h^{K-1}; a geometric tail
    that has already died out leaves only its (tiny) window values.
    """
    h = [1.0 / (n + 1) for n in idx]
    total = 0.0
    for j, v in enumerate(values):
        w = 1.0
        for i, hi in enumerate(h):
            if i != j:
                w *= hi / (hi - h[j])
        total += w * v
    return total


def _nodes(n: int, W: int) -> list[int]:
    return [n - j * W for j in range(EXTRAPOLATION_POINTS)]


@dataclass(frozen=True)
class ChiEstimate:
    lower: float
    upper: float
    tailSequence: tuple
    plateauQuality: float
    target: str
    N: int
    window: int
    extrapolated: float | None = None
    extrapolationShift: float = 0.0
    alphaTilde: tuple | None = None
    alphaSpread: float | None = None
    notes: tuple = ()

    def to_json(self) -> dict:
        out = {
            "lower": self.lower,
            "upper": self.upper,
            "plateauQuality": self.plateauQuality,
            "target": self.target,
            "N": self.N,
            "window": self.window,
            "tailSequence": list(self.tailSequence),
        }
        if self.extrapolated is not None:
            out["extrapolated"] = self.extrapolated
            out["extrapolationShift"] = self.extrapolationShift
        if self.alphaSpread is not None:
            out["alphaSpread"] = self.alphaSpread
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def _pitt(A: OperatorSpec) -> bool:
    if A.target == "lq":
        return A.q < A.p
    return A.target in ("l1", "bv") and A.p > 1


def chi_estimate(A: OperatorSpec, params: SpaceParams, N: int, window: int = 16, tol: float = 1e-12,
                 mode: NumericMode | str | None = "float") -> ChiEstimate:
    """Bounds on the Hausdorff measure of noncompactness of A from its row norms.

    The limsup of the row norms is read off the tail sup T_n = max_{n<=j<=N} R(j),
    extrapolated in 1/(n+1) from the points n, n-W, n-2W, n-3W.
    """
    if window < 1:
        raise ValidationError("window must be >= 1")
    if A.finite_rank:
        return ChiEstimate(0.0, 0.0, (), 0.0, A.target, N, window, 0.0,
                           notes=("finite rank: measure of noncompactness is zero",))
    if _pitt(A):
        return ChiEstimate(0.0, 0.0, (), 0.0, A.target, N, window, 0.0,
                           notes=("bounded operators l_p -> l_q with q < p are compact",))
    if A.target not in ("c0", "c", "linf"):
        raise ValidationError(f"no measure-of-noncompactness formula for target {A.target} at p = {A.p}")
    conj = A.conjugate
    At = associated_matrix(A, params, N, tol, mode)
    W = max(1, min(window, N // EXTRAPOLATION_POINTS))
    notes = []
    if W != window:
        notes.append(f"window shrunk to {W} to fit {EXTRAPOLATION_POINTS + 1} extrapolation points")

    alpha = None
    spread = None
    arr = At.to_array()
    if A.target == "c":
        nodes = _nodes(N, W)
        alpha = np.array([_limit_at_infinity([arr[n, k] for n in nodes], nodes) for k in range(arr.shape[1])])
        last = arr[max(0, N - W + 1):]
        spread = float(np.abs(last - alpha[None, :]).max()) if last.size else 0.0
        notes.append("column limits extrapolated in 1/(n+1) from the window tail")

    R = row_norms(At, conj, alpha)
    T = np.maximum.accumulate(R[::-1])[::-1]

    def extrap(n: int) -> float:
        nodes = _nodes(n, W)
        if nodes[-1] < 0:
            return float(T[n])
        v = _limit_at_infinity([T[j] for j in nodes], nodes)
        return float(min(max(v, 0.0), T[n]))

    top = extrap(N)
    prev = extrap(N - W) if N - W >= 0 else top
    quality = abs(top - prev) / max(top, tol)
    if quality > QUALITY_LIMIT:
        warnings.warn(f"tail sup has not plateaued (quality {quality:.3g})", PlateauNotReached, stacklevel=2)

    if A.target == "c0":
        lower = upper = top
    elif A.target == "c":
        # the operator norm also bounds the measure of noncompactness
        opnorm = float(row_norms(At, conj).max())
        upper = min(top, opnorm)
        lower = min(top / 2, upper)
    else:
        lower, upper = 0.0, top
    shift = abs(float(T[N]) - top) / max(float(T[N]), tol)
    return ChiEstimate(lower, upper, tuple(float(x) for x in T), quality, A.target, N, W, top, shift,
                       tuple(alpha.tolist()) if alpha is not None else None, spread, tuple(notes))


@dataclass(frozen=True)
class CompactVerdict:
    verdict: str
    reason: str
    chi: ChiEstimate | None = None

    def __str__(self) -> str:
        return self.verdict

    def to_json(self) -> dict:
        out = {"verdict": self.verdict, "reason": self.reason}
        if self.chi is not None:
            out["chi"] = self.chi.to_json()
        return out


def classify_compact(A: OperatorSpec, params: SpaceParams, N: int, window: int = 16, tol: float = 1e-12,
                     mode: NumericMode | str | None = "float") -> CompactVerdict:
    if _pitt(A):
        return CompactVerdict("compact", "l_p into l_q with q < p: every bounded operator is compact")
    if A.finite_rank:
        chi = chi_estimate(A, params, N, window, tol, mode)
        return CompactVerdict("compact", "finite rank", chi)
    if A.target not in ("c0", "c", "linf"):
        return CompactVerdict("undetermined", f"no compactness criterion for target {A.target} at p = {A.p}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PlateauNotReached)
        chi = chi_estimate(A, params, N, window, tol, mode)
    settled = chi.plateauQuality < QUALITY_LIMIT
    if chi.upper < tol and settled:
        return CompactVerdict("compact", "row-norm limsup is zero on a settled tail", chi)
    # a positive limit is only believed when extrapolating to n -> infinity barely moves the tail sup
    flat = chi.extrapolationShift < QUALITY_LIMIT
    if A.target in ("c0", "c") and chi.lower > tol and settled and flat:
        return CompactVerdict("noncompact", "row-norm limsup is bounded away from zero on a settled tail", chi)
    if A.target == "linf" and chi.upper >= tol:
        return CompactVerdict("undetermined", "the l_inf criterion is only sufficient", chi)
    return CompactVerdict("undetermined", "tail sup has not settled", chi)


__all__ = [
    "AssociatedMatrix", "ChiEstimate", "CompactVerdict", "FiniteRow", "GeometricRow", "OperatorSpec",
    "PlateauNotReached", "SeriesRow", "associated_matrix", "associated_sequence", "bv_norm", "chi_estimate",
    "classify_compact", "l1_norm", "operator_from_json", "operator_norm", "row_norms",
]
