"""Dual spaces and matrix mappings at finite truncation.

Conditions on a matrix window are named after the target class of the
matrix-mapping lemma they belong to (l1, c0, c, linf) and after their
shape: subset sums, row sups over K1, row sums over K2, column limits.
Every verdict is three-valued:
``True``, ``False`` or ``None`` (inconclusive), and records how the sup was
obtained.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .families import ExponentSequence, SpaceParams, as_exponent
from .numeric import (
    BadExponent,
    DimensionMismatch,
    NumericMode,
    ValidationError,
    ZeroR,
    ZeroS0,
    ZeroT,
    as_mode,
    binomial_row,
)
from .triangles import build_inverse_composite, compute_d_coefficients

EXACT = "exact-subset"
HEURISTIC = "interval-heuristic"

L_GRID = tuple(2 ** i for i in range(17))
DEFAULT_ORACLE_BUDGET = 12
# growth factor over the second half of the window that, with steady rises, reads as unbounded
GROWTH_FACTOR = 1.25


class MixedExponentRegime(ValidationError):
    pass


CONDITIONS = {
    "l1-subset-K1": "sup_F sup_{k in K1} |sum_{n in F} a_nk|^p_k < inf",
    "l1-subset-K2": "exists L: sup_F sum_{k in K2} |sum_{n in F} a_nk / L|^p'_k < inf",
    "c0-null-columns": "lim_n a_nk = 0 for all k",
    "c0-rows-K1": "for all L: sup_n sup_{k in K1} |a_nk L|^p_k < inf",
    "c0-rows-K2": "for all L: sup_n sum_{k in K2} |a_nk L|^p'_k < inf",
    "c-rows-K1": "sup_n sup_{k in K1} |a_nk|^p_k < inf",
    "c-rows-K2": "exists L: sup_n sum_{k in K2} |a_nk / L|^p'_k < inf",
    "c-column-limits": "exists (alpha_k): lim_n |a_nk - alpha_k| = 0 for all k",
    "c-centred-K1": "exists (alpha_k) for all L: sup_n sup_{k in K1} (|a_nk - alpha_k| L)^p_k < inf",
    "c-centred-K2": "exists (alpha_k) for all L: sup_n sum_{k in K2} (|a_nk - alpha_k| L)^p'_k < inf",
    "linf-rows-K1": "exists L: sup_n sup_{k in K1} |a_nk / L|^p_k < inf",
    "linf-rows-K2": "exists L: sup_n sum_{k in K2} |a_nk / L|^p'_k < inf",
}

# (column set, quantifier on L, how L enters, subtract column limits)
_ROW_CONDITIONS = {
    "c0-rows-K1": ("K1", "forall", "mul", False),
    "c0-rows-K2": ("K2", "forall", "mul", False),
    "c-rows-K1": ("K1", "plain", None, False),
    "c-rows-K2": ("K2", "exists", "div", False),
    "c-centred-K1": ("K1", "forall", "mul", True),
    "c-centred-K2": ("K2", "forall", "mul", True),
    "linf-rows-K1": ("K1", "exists", "div", False),
    "linf-rows-K2": ("K2", "exists", "div", False),
}


@dataclass(frozen=True)
class ConditionVerdict:
    holds: bool | None
    supValue: float
    method: str
    condition: str = ""
    witnessL: int | None = None
    N: int | None = None
    notes: tuple = ()
    components: dict = field(default_factory=dict, compare=False)

    @property
    def status(self) -> str:
        return {True: "true", False: "false", None: "inconclusive"}[self.holds]

    def to_json(self) -> dict:
        out = {
            "condition": self.condition,
            "holds": self.holds if self.holds is not None else "inconclusive",
            "witnessL": self.witnessL,
            "supValue": self.supValue,
            "method": self.method,
        }
        if self.N is not None:
            out["N"] = self.N
        if self.notes:
            out["notes"] = list(self.notes)
        if self.components:
            out["components"] = {k: v.to_json() for k, v in self.components.items()}
        return out


def _and(values: Sequence[bool | None]) -> bool | None:
    if any(v is False for v in values):
        return False
    if all(v is True for v in values):
        return True
    return None


def _bounded(profile: np.ndarray, tol: float) -> bool:
    """Window surrogate for 'the sup is finite'.

    ``profile[n]`` is the sup over the first n+1 rows. It counts as
    unbounded when, over the second half of the window, it rises on at
    least half of the steps and ends more than GROWTH_FACTOR above where
    that half started. A single late jump is not growth.
    """
    S = np.asarray(profile, dtype=float)
    if S.size == 0:
        return True
    if not np.all(np.isfinite(S)):
        return False
    tail = S[S.size // 2:]
    if tail.size < 2:
        return True
    steps = np.diff(tail)
    rises = np.count_nonzero(steps > tol + 1e-9 * np.abs(tail[:-1]))
    grew = tail[-1] > GROWTH_FACTOR * tail[0] + tol
    return not (grew and 2 * rises >= steps.size)


def _uniform(expo: np.ndarray, cols: np.ndarray) -> bool:
    """Equal exponents on the column set: scaling by L cannot change a verdict."""
    e = expo[cols]
    return e.size == 0 or bool(np.all(e == e[0]))


# -- exponents on a window --------------------------------------------------

def _exponent_arrays(p: ExponentSequence, ncols: int):
    pk = np.array([float(p[k]) for k in range(ncols)])
    k1 = pk <= 1
    k2 = ~k1
    conj = np.full(ncols, np.nan)
    conj[k2] = pk[k2] / (pk[k2] - 1)
    return pk, conj, k1, k2


def _as_array(matrix) -> np.ndarray:
    if isinstance(matrix, EMatrix):
        return matrix.to_array()
    arr = np.array([[float(v) for v in row] for row in matrix], dtype=float)
    if arr.ndim != 2:
        raise DimensionMismatch("matrix window must be two-dimensional")
    return arr


# -- sups over finite subsets of rows ---------------------------------------

def _subset_objective(kind: str, expo: np.ndarray, cols: np.ndarray, scale: float):
    """Objective on column sums over a row subset."""
    def f(colsums: np.ndarray) -> np.ndarray:
        vals = np.abs(colsums[..., cols] * scale) ** expo[cols]
        if vals.shape[-1] == 0:
            return np.zeros(colsums.shape[:-1])
        return vals.max(axis=-1) if kind == "max" else vals.sum(axis=-1)
    return f


def subset_sup_exact(a: np.ndarray, objective) -> tuple[float, tuple]:
    """Enumerate every subset F of rows. Cost 2^rows."""
    R = a.shape[0]
    if R > 22:
        raise ValidationError("exact subset enumeration is capped at 22 rows")
    masks = ((np.arange(2 ** R)[:, None] >> np.arange(R)) & 1).astype(float)
    vals = objective(masks @ a)
    best = int(np.argmax(vals))
    return float(vals[best]), tuple(i for i in range(R) if masks[best, i])


def subset_sup_heuristic(a: np.ndarray, objective, restarts: int = 8, seed: int = 0) -> tuple[float, tuple]:
    """Lower bound for the subset sup.

    Start pool: for every column the rows with positive entries and the
    rows with negative entries, plus all rows and a few seeded random
    subsets. Each start is improved by single-row flips until no flip helps.
    """
    R = a.shape[0]
    starts = [np.ones(R, dtype=bool)]
    for k in range(a.shape[1]):
        starts.append(a[:, k] > 0)
        starts.append(a[:, k] < 0)
    rng = np.random.default_rng(seed)
    starts.extend(rng.random((restarts, R)) < 0.5)

    best_val, best_mask = 0.0, np.zeros(R, dtype=bool)
    seen = set()
    for start in starts:
        key = start.tobytes()
        if key in seen:
            continue
        seen.add(key)
        mask = start.copy()
        cur = a[mask].sum(axis=0)
        val = float(objective(cur))
        improved = True
        while improved:
            improved = False
            # all single flips at once
            sign = np.where(mask, -1.0, 1.0)
            cand = cur[None, :] + sign[:, None] * a
            vals = objective(cand)
            i = int(np.argmax(vals))
            if vals[i] > val * (1 + 1e-15) + 1e-300:
                mask[i] = ~mask[i]
                cur = cand[i]
                val = float(vals[i])
                improved = True
        if val > best_val:
            best_val, best_mask = val, mask.copy()
    return best_val, tuple(np.flatnonzero(best_mask).tolist())


def _subset_profile(a: np.ndarray, objective, method: str, budget: int) -> tuple[np.ndarray, str]:
    """Subset sup over the first n+1 rows, for every n."""
    R = a.shape[0]
    if R == 0:
        return np.zeros(0), EXACT
    if method == "exact" or (method == "auto" and R <= budget):
        if R > 22:
            raise ValidationError("exact subset enumeration is capped at 22 rows")
        masks = ((np.arange(2 ** R)[:, None] >> np.arange(R)) & 1).astype(float)
        running = np.maximum.accumulate(objective(masks @ a))
        # masks below 2^(n+1) are exactly the subsets of rows 0..n
        return running[(1 << np.arange(1, R + 1)) - 1], EXACT
    prof = np.zeros(R)
    for n in range(R // 2, R):
        prof[n] = subset_sup_heuristic(a[: n + 1], objective)[0]
    prof[: R // 2] = prof[R // 2]
    return np.maximum.accumulate(prof), HEURISTIC


# -- the condition evaluators ----------------------------------------------

def _column_limits(a: np.ndarray) -> np.ndarray:
    return a[-1].copy()


def _row_condition(cond: str, a: np.ndarray, pk, conj, k1, k2, N: int, tol: float) -> ConditionVerdict:
    colset, quant, how, centred = _ROW_CONDITIONS[cond]
    cols = k1 if colset == "K1" else k2
    expo = pk if colset == "K1" else conj
    kind = "max" if colset == "K1" else "sum"
    notes = []
    b = a
    if centred:
        b = a - _column_limits(a)[None, :]
        notes.append("column limits estimated by the last row of the window")

    def profile(scale: float) -> np.ndarray:
        return np.maximum.accumulate(_subset_objective(kind, expo, cols, scale)(b))

    raw = profile(1.0)
    sup = float(raw[-1]) if raw.size else 0.0
    grid = (1,) if quant == "plain" or _uniform(expo, cols) else L_GRID
    if quant == "forall":
        ok = all(_bounded(profile(float(L)), tol) for L in grid)
        notes.append("exponents equal on the column set, so L only rescales" if len(grid) == 1
                     else f"grid-checked for L in 2^0..2^{len(L_GRID) - 1}")
        return ConditionVerdict(ok, sup, EXACT, cond, None, N, tuple(notes))
    for L in grid:
        if _bounded(profile(1.0 / L), tol):
            return ConditionVerdict(True, sup, EXACT, cond, None if quant == "plain" else L, N, tuple(notes))
    return ConditionVerdict(False, sup, EXACT, cond, None, N, tuple(notes))


def _limit_condition(cond: str, a: np.ndarray, N: int, tol: float) -> ConditionVerdict:
    """Columns observable in the window (k <= N/2) are judged on rows n > N/2."""
    half = N // 2
    ncols = min(a.shape[1], half + 1)
    if ncols == 0 or a.shape[0] <= half + 1:
        return ConditionVerdict(None, 0.0, HEURISTIC, cond, None, N, ("window too short",))
    target = np.zeros(a.shape[1]) if cond == "c0-null-columns" else _column_limits(a)
    tail = np.abs(a[half + 1:, :ncols] - target[None, :ncols])
    sup = float(tail.max()) if tail.size else 0.0
    if sup == 0.0:
        note = "columns settle exactly inside the window; the limit itself is beyond any window"
        return ConditionVerdict(True, 0.0, EXACT, cond, None, N, (note,))
    quarter = max(1, tail.shape[0] // 2)
    early = tail[:quarter].max(axis=0)
    late = tail[quarter:].max(axis=0) if tail.shape[0] > quarter else tail[-1:].max(axis=0)
    shrinking = np.all((late <= 0.9 * early) | (late <= tol))
    verdict = None if shrinking else False
    return ConditionVerdict(verdict, sup, HEURISTIC, cond, None, N,
                            ("limit only probed on the window tail",))


def check_condition(cond: str, matrix, p, N: int | None = None, oracle_budget: int = DEFAULT_ORACLE_BUDGET,
                    method: str = "auto", tol: float = 1e-12) -> ConditionVerdict:
    """Evaluate one condition of the list on a matrix window.

    ``matrix`` rows are n (or l), columns k (or n); ``p`` is indexed by the
    column. ``method`` picks the subset-sup route for the two subset conditions: ``"auto"``
    enumerates when the window has at most ``oracle_budget`` rows,
    ``"exact"`` always enumerates, ``"heuristic"`` never does.
    """
    if cond not in CONDITIONS:
        raise ValidationError(f"unknown condition {cond!r}")
    if method not in ("auto", "exact", "heuristic"):
        raise ValidationError(f"unknown subset method {method!r}")
    a = _as_array(matrix)
    if N is None:
        N = a.shape[0] - 1
    a = a[: N + 1]
    p = as_exponent(p)
    pk, conj, k1, k2 = _exponent_arrays(p, a.shape[1])
    uses_k2 = cond in ("l1-subset-K2", "c0-rows-K2", "c-rows-K2", "c-centred-K2", "linf-rows-K2")
    if uses_k2 and not k2.any():
        raise BadExponent(f"condition {cond} runs over K2 = {{k : p_k > 1}}, which is empty here")

    if cond in ("c0-null-columns", "c-column-limits"):
        return _limit_condition(cond, a, N, tol)
    if cond in _ROW_CONDITIONS:
        return _row_condition(cond, a, pk, conj, k1, k2, N, tol)

    if cond == "l1-subset-K1":
        if method == "heuristic" or (method == "auto" and a.shape[0] > oracle_budget):
            prof = _column_split_profile(a, pk, k1)
            return ConditionVerdict(_bounded(prof, tol), float(prof[-1]), EXACT, cond, None, N,
                                    ("column sign split is exact for this sup",))
        prof, m = _subset_profile(a, _subset_objective("max", pk, k1, 1.0), "exact", oracle_budget)
        return ConditionVerdict(_bounded(prof, tol), float(prof[-1]), m, cond, None, N)

    # l1-subset-K2
    raw, m = _subset_profile(a, _subset_objective("sum", conj, k2, 1.0), method, oracle_budget)
    sup = float(raw[-1]) if raw.size else 0.0
    grid = (1,) if _uniform(conj, k2) else L_GRID
    for L in grid:
        prof = raw if L == 1 else _subset_profile(a, _subset_objective("sum", conj, k2, 1.0 / L),
                                                  method, oracle_budget)[0]
        if _bounded(prof, tol):
            return ConditionVerdict(True, sup, m, cond, L, N)
    # a heuristic profile is only a lower bound, so its growth proves nothing about the half window
    return ConditionVerdict(False if m == EXACT else None, sup, m, cond, None, N)


def _column_split_profile(a: np.ndarray, pk: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Per column the best subset is its positive part or its negative part."""
    if not cols.any() or a.shape[0] == 0:
        return np.zeros(a.shape[0])
    pos = np.cumsum(np.where(a > 0, a, 0), axis=0)
    neg = -np.cumsum(np.where(a < 0, a, 0), axis=0)
    best = np.maximum(pos, neg)[:, cols] ** pk[cols]
    return best.max(axis=1)


# -- the matrix E of the gamma/beta dual computations ------------------------

class EMatrix:
    """Lower-triangular e_ln on 0 <= n <= l <= N; row l turns y into sum_{n<=l} a_n x_n."""

    def __init__(self, rows: list[tuple], mode: NumericMode):
        self.rows = rows
        self.mode = mode
        self.N = len(rows) - 1

    def entry(self, l: int, n: int):
        return self.rows[l][n] if n <= l else self.mode.zero()

    def row_dense(self, l: int) -> list:
        return list(self.rows[l]) + [self.mode.zero()] * (self.N - l)

    def dense(self) -> list[list]:
        return [self.row_dense(l) for l in range(self.N + 1)]

    def to_array(self) -> np.ndarray:
        return np.array([[float(v) for v in self.row_dense(l)] for l in range(self.N + 1)])

    def apply(self, y: Sequence) -> list:
        if len(y) != self.N + 1:
            raise DimensionMismatch("vector length does not match the window")
        out = []
        for row in self.rows:
            acc = self.mode.zero()
            for n, v in enumerate(row):
                acc += v * y[n]
            out.append(acc)
        return out


def _prepared(params: SpaceParams, N: int, mode: NumericMode):
    rv = params.r.terms(N + 1, mode)
    tv = params.t.terms(N + 1, mode)
    for n in range(N + 1):
        if rv[n] == 0:
            raise ZeroR(f"r_{n} = 0")
        if tv[n] == 0:
            raise ZeroT(f"t_{n} = 0")
    s0 = mode.num(params.s.term(0))
    if s0 == 0:
        raise ZeroS0("s_0 must be nonzero")
    D = compute_d_coefficients(params.s, N, mode)
    # signed weights (-1)^q D_q
    sd = [D[q] if q % 2 == 0 else -D[q] for q in range(N + 1)]
    binom = binomial_row(params.m - 1, N + 1, mode)
    return rv, tv, s0, sd, binom


def _e_row(a: list, l: int, W: list, rv, tv, s0, sd) -> tuple:
    """Row l of E given W[k] = sum_{j=k}^{l} C(m+j-k-1, j-k) a_j."""
    row = []
    for n in range(l + 1):
        acc = a[n] / (s0 * tv[n])
        # k = n: inner sum starts at j = n + 1
        acc += sd[0] / tv[n] * (W[n] - a[n])
        if n + 1 <= l:
            acc += sd[1] / tv[n + 1] * W[n + 1]
        for k in range(n + 2, l + 1):
            d = sd[k - n]
            if d and W[k]:
                acc += d / tv[k] * W[k]
        row.append(rv[n] * acc)
    return tuple(row)


def build_E(a: Sequence, params: SpaceParams, N: int | None = None,
            mode: NumericMode | str | None = None) -> EMatrix:
    """The matrix with sum_{n<=l} a_n x_n = (E y)_l, y the transform of x:

        e_ln = r_n [ a_n/(s_0 t_n)
                     + sum_{k=n}^{n+1} (-1)^(k-n) D_{k-n}/t_k sum_{j=n+1}^{l} C(m+j-k-1, j-k) a_j
                     + sum_{k=n+2}^{l} (-1)^(k-n) D_{k-n}/t_k sum_{j=k}^{l} C(m+j-k-1, j-k) a_j ]

    with empty sums equal to zero.
    """
    mode = as_mode(mode)
    if N is None:
        N = len(a) - 1
    if len(a) != N + 1:
        raise DimensionMismatch(f"need {N + 1} entries of a, got {len(a)}")
    a = mode.vec(a)
    rv, tv, s0, sd, binom = _prepared(params, N, mode)
    W = [mode.zero()] * (N + 1)
    rows = []
    for l in range(N + 1):
        for k in range(l + 1):
            W[k] += binom[l - k] * a[l]
        rows.append(_e_row(a, l, W, rv, tv, s0, sd))
    return EMatrix(rows, mode)


def e_tilde(A, params: SpaceParams, N: int, mode: NumericMode | str | None = None) -> list[list]:
    """Rows l of the mapping matrix: E built from row A_l, read at the window end.

    Partial sums of a row are taken up to the last window index, which is
    the finite stand-in for letting the upper limit run to infinity.
    """
    mode = as_mode(mode)
    rv, tv, s0, sd, binom = _prepared(params, N, mode)
    out = []
    for l in range(len(A)):
        a = mode.vec(A[l])
        if len(a) != N + 1:
            raise DimensionMismatch(f"row {l} has {len(a)} entries, window needs {N + 1}")
        W = []
        for k in range(N + 1):
            acc = mode.zero()
            for j in range(k, N + 1):
                if a[j]:
                    acc += binom[j - k] * a[j]
            W.append(acc)
        out.append(list(_e_row(a, N, W, rv, tv, s0, sd)))
    return out


def alpha_matrix(a: Sequence, params: SpaceParams, N: int, mode: NumericMode | str | None = None) -> list[list]:
    """c_nj = a_n b^(j)_n: the matrix turning y into (a_n x_n)."""
    mode = as_mode(mode)
    a = mode.vec(a)
    inv = build_inverse_composite(params, N, mode)
    return [[a[n] * v for v in inv.row(n)] + [mode.zero()] * (N - n) for n in range(N + 1)]


# -- series probes for B1 / B2 ---------------------------------------------

def _series_probe(partial: Callable[[int], float], term_at: Callable[[int], float], N: int, tol: float) -> bool | None:
    lo = N // 2
    sums = [partial(J) for J in range(lo, N + 1)]
    last = sums[-1]
    if not np.isfinite(last):
        return False
    spread = max(abs(s - last) for s in sums)
    if spread <= tol * max(1.0, abs(last)):
        return True
    t_end, t_mid = abs(term_at(N)), abs(term_at(lo))
    if t_end > tol and t_end >= t_mid:
        return False
    return None


def _b1_b2(a: list, params: SpaceParams, N: int, tol: float) -> tuple[ConditionVerdict, ConditionVerdict]:
    mode = NumericMode("float")
    a = [float(v) for v in a]
    tv = params.t.terms(N + 1, mode)
    D = compute_d_coefficients(params.s, N, mode)
    sd = [D[q] if q % 2 == 0 else -D[q] for q in range(N + 1)]
    binom = binomial_row(params.m - 1, N + 2, mode)
    observed = range(0, N // 4 + 1)

    # B1: sum_{j >= n+1} C(m+j-k-1, j-k) a_j for k in {n, n+1}
    b1 = []
    for n in observed:
        for k in (n, n + 1):
            terms = {j: binom[j - k] * a[j] for j in range(n + 1, N + 1)}
            cums = np.cumsum([terms[j] for j in range(n + 1, N + 1)])

            def partial(J, cums=cums, n=n):
                return float(cums[J - n - 1]) if J > n else 0.0

            b1.append(_series_probe(partial, lambda J, terms=terms: terms.get(J, 0.0), N, tol))

    # B2: sum_{k >= n+2} (-1)^(k-n) D_{k-n}/t_k sum_{j>=k} C(m+j-k-1, j-k) a_j
    W = np.zeros(N + 2)
    for k in range(N + 1):
        W[k] = sum(binom[j - k] * a[j] for j in range(k, N + 1))
    b2 = []
    for n in observed:
        terms = {k: sd[k - n] / tv[k] * W[k] for k in range(n + 2, N + 1)}
        keys = list(range(n + 2, N + 1))
        cums = np.cumsum([terms[k] for k in keys]) if keys else np.zeros(0)

        def partial(K, cums=cums, n=n):
            return float(cums[K - n - 2]) if K >= n + 2 else 0.0

        b2.append(_series_probe(partial, lambda K, terms=terms: terms.get(K, 0.0), N, tol))

    note = ("tail-decay probe: partial sums over the second half of the window",)
    return (ConditionVerdict(_and(b1), 0.0, HEURISTIC, "B1", None, N, note),
            ConditionVerdict(_and(b2), 0.0, HEURISTIC, "B2", None, N, note))


def _b3(a: list, params: SpaceParams, N: int, tol: float) -> ConditionVerdict:
    mode = NumericMode("float")
    rv = params.r.terms(N + 1, mode)
    tv = params.t.terms(N + 1, mode)
    with np.errstate(over="ignore"):
        vals = np.array([abs(rv[n] * float(a[n]) / tv[n]) ** float(params.p[n]) for n in range(N + 1)])
    prof = np.maximum.accumulate(vals)
    return ConditionVerdict(_bounded(prof, tol), float(prof[-1]), EXACT, "B3", None, N,
                            ("bounded in l_inf(p) with the space's own exponents",))


def _combine(name: str, parts: dict[str, ConditionVerdict], main: ConditionVerdict, N: int) -> ConditionVerdict:
    holds = _and([v.holds for v in parts.values()])
    method = HEURISTIC if any(v.method == HEURISTIC for v in parts.values()) else EXACT
    return ConditionVerdict(holds, main.supValue, method, name, main.witnessL, N, (), dict(parts))


def beta_battery(a: Sequence, params: SpaceParams, N: int, mode: NumericMode | str | None = None,
                 E: EMatrix | None = None, tol: float = 1e-12, finite_support: bool = False) -> ConditionVerdict:
    """The beta-dual sets for a on the window.

    With ``finite_support`` the window is all of a (zeros beyond N), so the
    series sets B1 and B2 hold trivially instead of being probed.
    """
    mode = as_mode(mode)
    regime = params.p.regime(N)
    if regime == "mixed":
        raise MixedExponentRegime("p must be > 1 everywhere or <= 1 everywhere on the window")
    if E is None:
        E = build_E(a, params, N, mode)
    e = E.to_array()
    if finite_support:
        note = ("finitely supported: every series is a finite sum",)
        b1 = ConditionVerdict(True, 0.0, EXACT, "B1", None, N, note)
        b2 = ConditionVerdict(True, 0.0, EXACT, "B2", None, N, note)
    else:
        b1, b2 = _b1_b2(list(a), params, N, tol)
    parts = {"B1": b1, "B2": b2, "B3": _b3(a, params, N, tol)}
    if regime == "gt1":
        parts["B4"] = check_condition("c-rows-K2", e, params.p, N, tol=tol)
        parts["B6"] = check_condition("c-column-limits", e, params.p, N, tol=tol)
        parts["B8"] = check_condition("c-centred-K2", e, params.p, N, tol=tol)
        main = parts["B4"]
    else:
        parts["B5"] = check_condition("c-rows-K1", e, params.p, N, tol=tol)
        parts["B6"] = check_condition("c-column-limits", e, params.p, N, tol=tol)
        parts["B7"] = check_condition("c-centred-K1", e, params.p, N, tol=tol)
        main = parts["B5"]
    return _combine("beta", parts, main, N)


def dual_membership(a: Sequence, dual: str, params: SpaceParams, N: int | None = None,
                    mode: NumericMode | str | None = None, tol: float = 1e-12,
                    finite_support: bool = False) -> ConditionVerdict:
    """Window test of a in the alpha-, beta- or gamma-dual of the space."""
    mode = as_mode(mode)
    if N is None:
        N = len(a) - 1
    if len(a) != N + 1:
        raise DimensionMismatch(f"need {N + 1} entries of a, got {len(a)}")
    regime = params.p.regime(N)
    if regime == "mixed":
        raise MixedExponentRegime("p must be > 1 everywhere or <= 1 everywhere on the window")
    if dual == "alpha":
        c = alpha_matrix(a, params, N, mode)
        v = check_condition("l1-subset-K2" if regime == "gt1" else "l1-subset-K1", c, params.p, N, tol=tol)
        return ConditionVerdict(v.holds, v.supValue, v.method, "alpha", v.witnessL, N, v.notes, {"H": v})
    if dual == "gamma":
        e = build_E(a, params, N, mode).to_array()
        v = check_condition("linf-rows-K2" if regime == "gt1" else "linf-rows-K1", e, params.p, N, tol=tol)
        return ConditionVerdict(v.holds, v.supValue, v.method, "gamma", v.witnessL, N, v.notes, {"Gamma": v})
    if dual == "beta":
        return beta_battery(a, params, N, mode, tol=tol, finite_support=finite_support)
    raise ValidationError(f"unknown dual {dual!r}")


def mapping_class_test(A, target: str, params: SpaceParams, N: int | None = None,
                       mode: NumericMode | str | None = None, subset_method: str = "auto",
                       oracle_budget: int = DEFAULT_ORACLE_BUDGET, tol: float = 1e-12,
                       finite_support: bool = True) -> ConditionVerdict:
    """Does the matrix A map the space into l_inf / l_1?  Rows of A are indexed by l.

    Rows are taken as finitely supported on the window unless
    ``finite_support`` is False, in which case their series are probed.
    """
    mode = as_mode(mode)
    rows = [list(r) for r in A]
    if N is None:
        N = len(rows[0]) - 1
    regime = params.p.regime(N)
    if regime == "mixed":
        raise MixedExponentRegime("p must be > 1 everywhere or <= 1 everywhere on the window")
    et = np.array([[float(v) for v in row] for row in e_tilde(rows, params, N, mode)])
    if target in ("linf", "l_inf"):
        cond = "linf-rows-K2" if regime == "gt1" else "c-rows-K1"
        main = check_condition(cond, et, params.p, len(rows) - 1, tol=tol)
    elif target in ("l1", "l_1"):
        cond = "l1-subset-K2" if regime == "gt1" else "l1-subset-K1"
        main = check_condition(cond, et, params.p, len(rows) - 1, oracle_budget, subset_method, tol)
    else:
        raise ValidationError(f"unsupported target {target!r}; use linf or l1")
    parts = {"sup": main}
    for l, row in enumerate(rows):
        parts[f"row{l}"] = beta_battery(row, params, N, mode, tol=tol, finite_support=finite_support)
    return _combine(f"map-{target}", parts, main, N)


def verdict_json(v: ConditionVerdict) -> dict:
    return v.to_json()


__all__ = [
    "CONDITIONS", "ConditionVerdict", "EMatrix", "MixedExponentRegime", "alpha_matrix", "beta_battery",
    "build_E", "check_condition", "dual_membership", "e_tilde", "mapping_class_test", "subset_sup_exact",
    "subset_sup_heuristic",
]
