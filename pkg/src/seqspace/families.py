"""Generating sequences r, s, t, the exponent sequence p, and the preset catalog."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Mapping, Sequence

from .numeric import (
    BadExponent,
    NumericMode,
    RangeError,
    ValidationError,
    ZeroR,
    ZeroS0,
    ZeroT,
    as_mode,
    to_fraction,
)

EXPLICIT = "explicit-prefix"
CONSTANT = "constant"
ARITHMETIC = "arithmetic"
GEOMETRIC = "geometric"
CLOSED_FORM = "closed-form"


def _exactish(v):
    # keep floats as floats so float-only inputs stay cheap; normalise the rest
    if isinstance(v, float):
        return v
    return to_fraction(v)


@dataclass(frozen=True)
class SequenceFamily:
    """An infinite real sequence produced term by term.

    ``prefix`` holds explicit leading terms; ``tail`` (if any) is a closed form
    in the index used for every n beyond the prefix.
    """

    kind: str
    prefix: tuple = ()
    tail: Callable[[int], Any] | None = field(default=None, compare=False)
    name: str = ""
    spec: Mapping[str, Any] = field(default_factory=dict, compare=False)

    @classmethod
    def explicit(cls, values: Sequence, tail: Callable[[int], Any] | None = None) -> "SequenceFamily":
        vals = tuple(_exactish(v) for v in values)
        return cls(EXPLICIT, vals, tail, name="explicit", spec={"values": list(vals)})

    @classmethod
    def constant(cls, c=1) -> "SequenceFamily":
        c = _exactish(c)
        return cls(CONSTANT, (), lambda n: c, name=f"constant({c})", spec={"constant": c})

    @classmethod
    def ones(cls) -> "SequenceFamily":
        return cls.constant(1)

    @classmethod
    def arithmetic(cls, first=0, step=1) -> "SequenceFamily":
        a, d = _exactish(first), _exactish(step)
        return cls(ARITHMETIC, (), lambda n: a + d * n, name=f"arithmetic({a},{d})",
                   spec={"arithmetic": [a, d]})

    @classmethod
    def geometric(cls, first=1, ratio=Fraction(1, 2)) -> "SequenceFamily":
        a, q = _exactish(first), _exactish(ratio)
        return cls(GEOMETRIC, (), lambda n: a * q ** n, name=f"geometric({a},{q})",
                   spec={"geometric": [a, q]})

    @classmethod
    def closed_form(cls, fn: Callable[[int], Any], name: str) -> "SequenceFamily":
        return cls(CLOSED_FORM, (), fn, name=name, spec={"closed-form": name})

    def term(self, n: int):
        if n < 0:
            raise RangeError(f"negative index {n}")
        if n < len(self.prefix):
            return self.prefix[n]
        if self.tail is None:
            raise RangeError(
                f"{self.name or self.kind}: index {n} beyond explicit prefix of length {len(self.prefix)}"
            )
        return self.tail(n)

    def terms(self, count: int, mode: NumericMode | str | None = None) -> list:
        mode = as_mode(mode)
        return [mode.num(self.term(n)) for n in range(count)]

    def available(self, n: int) -> bool:
        return n < len(self.prefix) or self.tail is not None


ONES = SequenceFamily.ones()


@dataclass(frozen=True)
class ExponentSequence:
    """Bounded sequence of strictly positive exponents p_k.

    ``values`` lists leading exponents; ``tail_value`` (default: repeat the
    last value) is used beyond them.
    """

    values: tuple
    tail_value: Fraction | None = None

    def __post_init__(self):
        if not self.values:
            raise BadExponent("exponent sequence needs at least one value")
        vals = tuple(to_fraction(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        tail = vals[-1] if self.tail_value is None else to_fraction(self.tail_value)
        object.__setattr__(self, "tail_value", tail)
        for v in vals + (tail,):
            if v <= 0:
                raise BadExponent(f"exponents must be strictly positive, got {v}")

    @classmethod
    def constant(cls, p) -> "ExponentSequence":
        return cls((p,))

    @property
    def is_constant(self) -> bool:
        return all(v == self.tail_value for v in self.values)

    def __getitem__(self, k: int) -> Fraction:
        return self.values[k] if k < len(self.values) else self.tail_value

    def window(self, N: int) -> list[Fraction]:
        return [self[k] for k in range(N + 1)]

    @property
    def H(self) -> Fraction:
        return max(self.values + (self.tail_value,))

    @property
    def M(self) -> Fraction:
        return max(Fraction(1), self.H)

    def inf(self, N: int) -> Fraction:
        return min(self.window(N))

    def K1(self, N: int) -> list[int]:
        return [k for k in range(N + 1) if self[k] <= 1]

    def K2(self, N: int) -> list[int]:
        return [k for k in range(N + 1) if self[k] > 1]

    def conjugate(self, k: int) -> Fraction:
        pk = self[k]
        if pk <= 1:
            raise BadExponent(f"p_{k} = {pk} <= 1 has no finite conjugate exponent")
        return pk / (pk - 1)

    def regime(self, N: int) -> str:
        """'gt1' if p_k > 1 on the window, 'le1' if p_k <= 1, else 'mixed'."""
        w = self.window(N)
        if all(v > 1 for v in w):
            return "gt1"
        if all(v <= 1 for v in w):
            return "le1"
        return "mixed"

    def to_json(self):
        if self.is_constant:
            return str(self.tail_value)
        return {"values": [str(v) for v in self.values], "tail": str(self.tail_value)}


def as_exponent(p) -> ExponentSequence:
    if isinstance(p, ExponentSequence):
        return p
    if isinstance(p, (list, tuple)):
        return ExponentSequence(tuple(p))
    return ExponentSequence.constant(p)


@dataclass(frozen=True)
class SpaceParams:
    """The data (r, s, t, m, p) fixing one space of the family."""

    r: SequenceFamily
    s: SequenceFamily
    t: SequenceFamily
    m: int = 1
    p: ExponentSequence = field(default_factory=lambda: ExponentSequence.constant(1))
    label: str = ""

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 1:
            raise ValidationError(f"difference order m must be a positive integer, got {self.m!r}")
        object.__setattr__(self, "p", as_exponent(self.p))
        if to_fraction(self.s.term(0)) == 0:
            raise ZeroS0("s_0 must be nonzero")

    def validate(self, N: int) -> None:
        """Check r_n != 0 and t_n != 0 on the index window [0, N]."""
        for n in range(N + 1):
            if self.r.term(n) == 0:
                raise ZeroR(f"r_{n} = 0")
            if self.t.term(n) == 0:
                raise ZeroT(f"t_{n} = 0")

    def with_p(self, p) -> "SpaceParams":
        return SpaceParams(self.r, self.s, self.t, self.m, as_exponent(p), self.label)

    def with_m(self, m: int) -> "SpaceParams":
        return SpaceParams(self.r, self.s, self.t, m, self.p, self.label)

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "r": self.r.name,
            "s": self.s.name,
            "t": self.t.name,
            "m": self.m,
            "p": self.p.to_json(),
        }


def weighted_mean(u: SequenceFamily | None = None, v: SequenceFamily | None = None,
                  m: int = 1, p=1) -> SpaceParams:
    """r_n = 1/u_n, t_n = v_n, s = e."""
    u = u or ONES
    v = v or ONES

    def reciprocal(n: int):
        un = u.term(n)
        if un == 0:
            raise ZeroR(f"u_{n} = 0 gives no r_{n}")
        return 1.0 / un if isinstance(un, float) else 1 / to_fraction(un)

    r = SequenceFamily.closed_form(reciprocal, f"1/({u.name})")
    return SpaceParams(r, ONES, v, m, as_exponent(p), label="weighted-mean")


def cesaro_alpha(alpha=Fraction(1, 2), m: int = 1, p=1) -> SpaceParams:
    """r_n = n + 1, t_n = 1 + alpha^n, s = e."""
    a = _exactish(alpha)
    if not 0 < a < 1:
        raise ValidationError("cesaro-alpha needs 0 < alpha < 1")
    r = SequenceFamily.closed_form(lambda n: Fraction(n + 1), "n+1")
    t = SequenceFamily.closed_form(lambda n: 1 + a ** n, f"1+({a})^n")
    return SpaceParams(r, ONES, t, m, as_exponent(p), label="cesaro-alpha")


def lambda_means(lam: SequenceFamily | None = None, m: int = 1, p=1) -> SpaceParams:
    """r_n = lambda_n, t_n = lambda_n - lambda_{n-1} (lambda_{-1} = 0), s = e."""
    lam = lam or SequenceFamily.closed_form(lambda n: Fraction(n + 1), "n+1")

    def diff(n: int):
        return lam.term(n) - (lam.term(n - 1) if n > 0 else 0)

    t = SequenceFamily.closed_form(diff, f"diff({lam.name})")
    return SpaceParams(lam, ONES, t, m, as_exponent(p), label="lambda")


def identity_params(p=1) -> SpaceParams:
    """r = s = t = e, m = 1: the composite transform is the identity."""
    return SpaceParams(ONES, ONES, ONES, 1, as_exponent(p), label="identity")


def _family_arg(args: Mapping[str, Any], key: str):
    if key not in args:
        return None
    return family_from_json(args[key])


PRESETS: dict[str, Callable[..., SpaceParams]] = {
    "weighted-mean": lambda args: weighted_mean(
        _family_arg(args, "u"), _family_arg(args, "v"), int(args.get("m", 1)), args.get("p", 1)
    ),
    "cesaro-alpha": lambda args: cesaro_alpha(
        to_fraction(args.get("alpha", Fraction(1, 2))), int(args.get("m", 1)), args.get("p", 1)
    ),
    "lambda": lambda args: lambda_means(_family_arg(args, "lambda"), int(args.get("m", 1)), args.get("p", 1)),
    "identity": lambda args: identity_params(args.get("p", 1)),
}


def preset(name: str, **args) -> SpaceParams:
    try:
        builder = PRESETS[name]
    except KeyError:
        raise ValidationError(f"unknown preset {name!r}; known: {sorted(PRESETS)}") from None
    return builder(args)


def family_from_json(obj) -> SequenceFamily:
    """Build a family from ``{"values": [...]}``, ``{"constant": c}``, etc.

    Bare numbers mean constant sequences and bare lists explicit prefixes.
    """
    if isinstance(obj, SequenceFamily):
        return obj
    if isinstance(obj, (int, float, str, Fraction)):
        return SequenceFamily.constant(obj)
    if isinstance(obj, list):
        return SequenceFamily.explicit(obj)
    if not isinstance(obj, Mapping):
        raise ValidationError(f"cannot interpret {obj!r} as a sequence")
    if "values" in obj:
        tail = obj.get("tail")
        tail_fn = None
        if tail is not None:
            tail_fam = family_from_json(tail)
            tail_fn = tail_fam.term
        return SequenceFamily.explicit(obj["values"], tail_fn)
    if "constant" in obj:
        return SequenceFamily.constant(obj["constant"])
    if "arithmetic" in obj:
        a, d = obj["arithmetic"]
        return SequenceFamily.arithmetic(a, d)
    if "geometric" in obj:
        a, q = obj["geometric"]
        return SequenceFamily.geometric(a, q)
    if "closed-form" in obj:
        return closed_form_family(obj["closed-form"], obj.get("args", {}))
    raise ValidationError(f"unrecognised sequence description {dict(obj)!r}")


CLOSED_FORMS: dict[str, Callable[..., Callable[[int], Any]]] = {
    "ones": lambda: (lambda n: Fraction(1)),
    "n+1": lambda: (lambda n: Fraction(n + 1)),
    "1+alpha^n": lambda alpha="1/2": (lambda n, a=to_fraction(alpha): 1 + a ** n),
    "alpha^n": lambda alpha="1/2": (lambda n, a=to_fraction(alpha): a ** n),
    "1/(n+1)": lambda: (lambda n: Fraction(1, n + 1)),
    "1+1/(n+1)": lambda: (lambda n: 1 + Fraction(1, n + 1)),
}


def closed_form_family(name: str, args: Mapping[str, Any] | None = None) -> SequenceFamily:
    try:
        fn = CLOSED_FORMS[name](**(args or {}))
    except KeyError:
        raise ValidationError(f"unknown closed form {name!r}; known: {sorted(CLOSED_FORMS)}") from None
    return SequenceFamily.closed_form(fn, name)


def params_from_json(obj: Mapping[str, Any]) -> SpaceParams:
    """``{"preset": name, "args": {...}}`` or ``{"r":..., "s":..., "t":..., "m":..., "p":...}``."""
    if "preset" in obj:
        args = dict(obj.get("args", {}))
        for key in ("m", "p"):
            if key in obj:
                args[key] = obj[key]
        return preset(obj["preset"], **args)
    try:
        r, s, t = (family_from_json(obj[k]) for k in ("r", "s", "t"))
    except KeyError as exc:
        raise ValidationError(f"params need r, s, t or a preset (missing {exc})") from None
    p = obj.get("p", 1)
    if isinstance(p, Mapping):
        p = ExponentSequence(tuple(p["values"]), p.get("tail"))
    return SpaceParams(r, s, t, int(obj.get("m", 1)), as_exponent(p), label=obj.get("label", "custom"))
