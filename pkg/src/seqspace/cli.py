"""Batch front-end: ``seqspace <command> [options]``.

Every report is a JSON object carrying N, mode, tol and the toolkit
version next to the result. Exit codes: 0 success, 1 self-test failure,
2 validation failure, 3 numeric-policy violation, 4 inconclusive verdict
under ``--strict``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
import warnings
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .compact import (
    PlateauNotReached,
    bv_norm,
    chi_estimate,
    classify_compact,
    l1_norm,
    operator_from_json,
    operator_norm,
)
from .duals import CONDITIONS, build_E, check_condition, dual_membership, mapping_class_test
from .families import SequenceFamily, SpaceParams, params_from_json, preset
from .numeric import NumericMode, NumericPolicyError, ValidationError, fmt, to_fraction
from .spaces import (
    basis_vector,
    bk_norm,
    forward_transform,
    inverse_transform,
    lp_norm,
    paranorm,
    paranorm_of_image,
    remainder_curve,
)
from .triangles import (
    build_A,
    build_composite,
    build_delta,
    build_inverse_composite,
    compute_d_coefficients,
    determinant_oracle_d,
    matmul,
    max_abs_deviation_from_identity,
)

EXIT_OK, EXIT_SELFTEST, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_INCONCLUSIVE = 0, 1, 2, 3, 4


class ParseError(ValidationError):
    def __init__(self, message: str, line: int | None = None, offset: int | None = None):
        where = f" (line {line}, offset {offset})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.offset = offset


def _load_json_text(text: str, source: str = "<input>") -> Any:
    try:
        # decimals become exact rationals
        return json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: {exc.msg}", exc.lineno, exc.colno) from None


def load_json(path: str | Path) -> Any:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None
    return _load_json_text(text, str(path))


def _parse_csv(text: str, source: str) -> list[Fraction]:
    values = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        cells = [c.strip() for c in row if c.strip()]
        if not cells:
            continue
        if len(cells) != 1:
            raise ParseError(f"{source}: expected a single column", lineno, len(row[0]) + 1)
        try:
            values.append(Fraction(cells[0]))
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"{source}: cannot parse {cells[0]!r}", lineno, 1) from None
    return values


def ingest_sequence(path: str | Path) -> SequenceFamily | SpaceParams:
    """Read a sequence file.

    ``{"values": [...]}`` gives an explicit-prefix family, ``{"preset": ...,
    "args": {...}}`` a parameter preset, and a single-column CSV a family of
    its rows. Decimal literals are parsed exactly.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None
    if path.suffix.lower() == ".csv" or not text.lstrip().startswith(("{", "[")):
        return SequenceFamily.explicit(_parse_csv(text, str(path)))
    obj = _load_json_text(text, str(path))
    if isinstance(obj, list):
        return SequenceFamily.explicit(obj)
    if "preset" in obj:
        return preset(obj["preset"], **obj.get("args", {}))
    if "values" in obj:
        return SequenceFamily.explicit(obj["values"])
    raise ParseError(f"{path}: expected 'values' or 'preset'")


def _vector(path: str, N: int | None) -> list:
    fam = ingest_sequence(path)
    if isinstance(fam, SpaceParams):
        raise ValidationError(f"{path} describes parameters, not a vector")
    if N is None:
        return list(fam.prefix)
    return [fam.term(n) for n in range(N + 1)]


# -- argument handling ---------------------------------------------------------

def _params(args) -> SpaceParams:
    if args.params:
        obj = load_json(args.params)
    elif args.preset:
        obj = {"preset": args.preset, "args": {}}
    else:
        obj = {"preset": "identity", "args": {}}
    if args.m is not None:
        obj["m"] = args.m
    if args.p is not None:
        obj["p"] = to_fraction(args.p)
    return params_from_json(obj)


def _mode(args) -> NumericMode:
    return NumericMode(args.mode, args.tol)


def _N(args, default: int | None = None) -> int:
    N = args.N if args.N is not None else default
    if N is None:
        raise ValidationError("--N is required for this command")
    if N < 1:
        raise ValidationError("N must be >= 1")
    return N


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, bool) or obj is None:
        return obj
    return fmt(obj)


class _Job:
    def __init__(self, args):
        self.args = args
        self.inconclusive = False

    def report(self, result: dict, N: int | None) -> dict:
        return {
            "command": self.args.command,
            "N": N,
            "mode": self.args.mode,
            "tol": self.args.tol,
            "version": __version__,
            "result": _jsonable(result),
        }

    def verdict(self, v) -> dict:
        if v.holds is None:
            self.inconclusive = True
        return v.to_json()


def cmd_build(job: _Job, args) -> dict:
    params, mode, N = _params(args), _mode(args), _N(args)
    builders = {
        "composite": lambda: build_composite(params, N, mode),
        "inverse": lambda: build_inverse_composite(params, N, mode),
        "A": lambda: build_A(params.r, params.s, params.t, N, mode),
        "delta": lambda: build_delta(params.m, N, mode),
    }
    if args.which == "D":
        return job.report({"D": list(compute_d_coefficients(params.s, N, mode).values)}, N)
    return job.report(builders[args.which]().to_json(), N)


def cmd_transform(job: _Job, args) -> dict:
    params, mode = _params(args), _mode(args)
    x = _vector(args.x, args.N)
    if args.inverse:
        return job.report({"x": inverse_transform(x, params, mode)}, len(x) - 1)
    y = forward_transform(x, params, mode)
    res = paranorm_of_image(y, params.p, mode)
    return job.report({"y": y, "paranorm": res.value, "lastTerm": res.last_term}, len(x) - 1)


def cmd_paranorm(job: _Job, args) -> dict:
    params, mode = _params(args), _mode(args)
    x = _vector(args.x, args.N)
    res = paranorm(x, params, mode)
    body = {"paranorm": res.value, "lastTerm": res.last_term, "truncationOk": res.truncation_ok(args.tol)}
    if params.p.is_constant and params.p.tail_value >= 1:
        body["bkNorm"] = bk_norm(x, params, mode=mode)
    return job.report(body, len(x) - 1)


def cmd_basis(job: _Job, args) -> dict:
    params, mode = _params(args), _mode(args)
    if args.j is not None:
        N = _N(args)
        return job.report({"j": args.j, "b": list(basis_vector(args.j, params, N, mode).b)}, N)
    x = _vector(args.x, args.N)
    curve = remainder_curve(x, params, mode)
    if args.csv:
        _write_csv(args.csv, ["J", "remainder"], [(J, fmt(v)) for J, v in enumerate(curve)])
    return job.report({"remainder": curve}, len(x) - 1)


def cmd_duals(job: _Job, args) -> dict:
    params, mode = _params(args), _mode(args)
    a = _vector(args.a, args.N)
    v = dual_membership(a, args.dual, params, len(a) - 1, mode, args.tol)
    return job.report(job.verdict(v), len(a) - 1)


def cmd_condition(job: _Job, args) -> dict:
    obj = load_json(args.matrix)
    rows = obj["rows"] if isinstance(obj, dict) else obj
    p = to_fraction(args.p) if args.p is not None else 1
    v = check_condition(args.cond, rows, p, args.N, method=args.subset, tol=args.tol)
    return job.report(job.verdict(v), v.N)


def cmd_map(job: _Job, args) -> dict:
    params, mode = _params(args), _mode(args)
    obj = load_json(args.A)
    rows = obj["rows"] if isinstance(obj, dict) else obj
    N = len(rows[0]) - 1
    v = mapping_class_test(rows, args.target or "linf", params, N, mode, args.subset, tol=args.tol)
    return job.report(job.verdict(v), N)


def _operator(args):
    obj = load_json(args.A)
    if args.p is not None:
        obj["p"] = to_fraction(args.p)
    if args.target is not None:
        obj["target"] = args.target
    if args.q is not None:
        obj["q"] = to_fraction(args.q)
    return operator_from_json(obj)


def cmd_norm(job: _Job, args) -> dict:
    A = _operator(args)
    params, mode, N = _params(args), _mode(args), _N(args)
    if A.p == 1:
        if A.target == "bv":
            return job.report({"bvNorm": bv_norm(A, params, N, args.tol, mode)}, N)
        return job.report({"l1Norm": l1_norm(A, params, N, args.tol, mode)}, N)
    return job.report({"operatorNorm": operator_norm(A, params, N, args.tol, mode)}, N)


def cmd_chi(job: _Job, args) -> dict:
    A = _operator(args)
    params, N = _params(args), _N(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", PlateauNotReached)
        chi = chi_estimate(A, params, N, args.window, args.tol, _mode(args))
    body = chi.to_json()
    body["warnings"] = [str(w.message) for w in caught if issubclass(w.category, PlateauNotReached)]
    if args.csv:
        _write_csv(args.csv, ["n", "T"], list(enumerate(chi.tailSequence)))
    return job.report(body, N)


def cmd_classify(job: _Job, args) -> dict:
    A = _operator(args)
    params, N = _params(args), _N(args)
    v = classify_compact(A, params, N, args.window, args.tol, _mode(args))
    if v.verdict == "undetermined":
        job.inconclusive = True
    return job.report(v.to_json(), N)


def selftest(params: SpaceParams, N: int = 16, seed: int = 0) -> dict[str, bool]:
    """Invariant battery on one parameter set, exact arithmetic, small window."""
    rng = random.Random(seed)
    mode = NumericMode("rational")
    checks = {}
    prod = matmul(build_composite(params, N, mode), build_inverse_composite(params, N, mode))
    checks["inverse-identity"] = max_abs_deviation_from_identity(prod) == 0
    D = compute_d_coefficients(params.s, min(N, 8), mode)
    checks["d-oracle"] = all(D[n] == determinant_oracle_d(params.s, n, mode) for n in range(min(N, 8) + 1))
    ok_round, ok_master = True, True
    for _ in range(5):
        x = [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(N + 1)]
        a = [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(N + 1)]
        y = forward_transform(x, params, mode)
        ok_round &= inverse_transform(y, params, mode) == x
        Ey = build_E(a, params, N, mode).apply(y)
        partial = Fraction(0)
        for l in range(N + 1):
            partial += a[l] * x[l]
            ok_master &= Ey[l] == partial
    checks["roundtrip"] = ok_round
    checks["e-matrix-identity"] = ok_master
    if params.p.is_constant and params.p.tail_value >= 1:
        x = [Fraction(rng.randint(-9, 9)) for _ in range(N + 1)]
        checks["isometry"] = bk_norm(x, params, mode=mode) == lp_norm(
            forward_transform(x, params, mode), params.p.tail_value, mode)
    return checks


def cmd_selftest(job: _Job, args) -> dict:
    params = _params(args)
    N = _N(args, 16)
    checks = selftest(params, N, args.seed)
    job.failed = not all(checks.values())
    return job.report({"params": params.label, "checks": checks, "passed": not job.failed}, N)


def _write_csv(path: str, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


COMMANDS = {
    "build": cmd_build,
    "transform": cmd_transform,
    "paranorm": cmd_paranorm,
    "basis": cmd_basis,
    "duals": cmd_duals,
    "condition": cmd_condition,
    "map": cmd_map,
    "norm": cmd_norm,
    "chi": cmd_chi,
    "classify": cmd_classify,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--params", help="JSON file with r, s, t, m, p or a preset")
    common.add_argument("--preset", help="preset name: weighted-mean, cesaro-alpha, lambda, identity")
    common.add_argument("--N", type=int, help="truncation index (window [0, N])")
    common.add_argument("--mode", choices=("rational", "float"), default="rational")
    common.add_argument("--tol", type=float, default=1e-12)
    common.add_argument("--p", help="exponent (overrides params / operator file)")
    common.add_argument("--m", type=int, help="difference order (overrides params)")
    common.add_argument("--target", help="c0, c, linf, lq, l1 or bv")
    common.add_argument("--window", type=int, default=16)
    common.add_argument("--strict", action="store_true", help="exit 4 on inconclusive verdicts")
    common.add_argument("--out", help="write the JSON report here instead of stdout")

    parser = argparse.ArgumentParser(prog="seqspace", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", parents=[common], help="write a triangle matrix")
    p.add_argument("--which", choices=("composite", "inverse", "A", "delta", "D"), default="composite")
    p = sub.add_parser("transform", parents=[common], help="y = composite x (or the inverse)")
    p.add_argument("--x", required=True)
    p.add_argument("--inverse", action="store_true")
    p = sub.add_parser("paranorm", parents=[common], help="paranorm and BK norm of x")
    p.add_argument("--x", required=True)
    p = sub.add_parser("basis", parents=[common], help="basis vector b^(j) or remainder curve of x")
    p.add_argument("--x")
    p.add_argument("--j", type=int)
    p.add_argument("--csv")
    p = sub.add_parser("duals", parents=[common], help="dual-space membership of a")
    p.add_argument("--a", required=True)
    p.add_argument("--dual", choices=("alpha", "beta", "gamma"), default="beta")
    p = sub.add_parser("condition", parents=[common], help="one matrix condition on a window")
    p.add_argument("--cond", choices=sorted(CONDITIONS), required=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--subset", choices=("auto", "exact", "heuristic"), default="auto")
    p = sub.add_parser("map", parents=[common], help="matrix-mapping test into linf or l1")
    p.add_argument("--A", required=True)
    p.add_argument("--subset", choices=("auto", "exact", "heuristic"), default="auto")
    for name, helptext in (("norm", "operator norm"), ("chi", "measure of noncompactness"),
                           ("classify", "compactness classification")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--A", required=True, help="operator JSON (dense, sparse or separable)")
        p.add_argument("--q", help="target exponent for --target lq")
        if name == "chi":
            p.add_argument("--csv", help="write the tail sequence here")
    p = sub.add_parser("selftest", parents=[common], help="run the invariant battery")
    p.add_argument("--seed", type=int, default=0)
    return parser


def run(argv: Sequence[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    job = _Job(args)
    job.failed = False
    try:
        report = COMMANDS[args.command](job, args)
    except NumericPolicyError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_NUMERIC
    except (ValidationError, IndexError, KeyError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_VALIDATION
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text, file=stdout)
    if job.failed:
        return EXIT_SELFTEST
    if args.strict and job.inconclusive:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
