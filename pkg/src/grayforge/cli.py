"""Command-line front end: ``grayforge <command> [flags]``.

Exit codes: 0 success, 1 a check FAILED, 2 no root / no admissible
solution, 3 validation failure, 4 unreadable or malformed input, 5 usage.
"""

from __future__ import annotations

import argparse
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import serialization as ser
from .boundary.certify import identity_suite, kaehler_existence
from .boundary.solvers import (
    BoundarySearchConfig,
    cpn_solve,
    kaehler_solve,
    product_solve,
    sphere_bundle_solve,
    symmetric_solve,
)
from .curvature import gray_criteria, ricci_eigenvalue_arrays, interior_mask, smoothness_check, smoothness_failures
from .errors import GrayforgeError, NoRoot
from .profiles.reconstruct import Profile
from .profiles.types import CaseTag, SolutionSpec, format_rational

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_NO_ROOT = 2
EXIT_VALIDATION = 3
EXIT_PARSE = 4
EXIT_USAGE = 5

VERDICT_OK = "GRAY-VERIFIED"
VERDICT_FAILED = "FAILED"

# Tolerances of the verification document (all relative except smoothness).
TOLERANCES = {
    "lambdaGap01": 1e-9,
    "grayDefect": 1e-8,
    "muQuadResidual": 1e-9,
    "prop2aDefect": 1e-8,
    "constraintDefect": 1e-8,
    "gridConsistency": 1e-9,
    "speedDrift": 1e-9,
    "killingDrift": 1e-6,
}


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 by default; 2 means NoRoot here
        raise UsageError(message)


def _rational(text: str) -> Fraction:
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise InputError(f"cannot parse {text!r} as a rational p/q") from None
    return value


def _rational_list(text: str) -> list[Fraction]:
    return [_rational(piece) for piece in text.split(",") if piece.strip()]


def _int_range(text: str) -> list[int]:
    """Parse ``4``, ``2..5`` or ``2,3,6``."""
    try:
        if ".." in text:
            a, b = text.split("..")
            return list(range(int(a), int(b) + 1))
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise InputError(f"cannot parse {text!r} as an integer range") from None


@dataclass
class RunConfig:
    command: str
    args: argparse.Namespace

    @property
    def search(self) -> BoundarySearchConfig:
        a = self.args
        return BoundarySearchConfig(bracketMax=a.bracket_max, tolAbs=a.tol_abs, maxIter=a.max_iter)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="grayforge", description="Solve and certify cohomogeneity-one Gray metrics.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def case_flags(sp):
        sp.add_argument("--case", required=True, help="sphere-bundle | projective-space | kaehler | product")
        sp.add_argument("--n", required=True, help="complex dimension n (a range for sweep)")
        sp.add_argument("--s", help="bundle parameter as p/q")
        sp.add_argument("--epsilon", help="sign of the base scalar curvature")
        sp.add_argument("--A", dest="A", help="substitution constant A in {-1, 1}")
        sp.add_argument("--x", help="left boundary abscissa (p/q or decimal)")
        sp.add_argument("--c", help="ratio y/x for the product case")
        sp.add_argument("--bracket-max", type=float, default=50.0)
        sp.add_argument("--tol-abs", type=float, default=1e-12)
        sp.add_argument("--max-iter", type=int, default=200)

    solve = sub.add_parser("solve", help="solve a boundary problem and write a profile document")
    case_flags(solve)
    solve.add_argument("--symmetric", action="store_true", help="sphere-bundle: use the y = -x solution")
    solve.add_argument("--grid-size", type=int, default=2048)
    solve.add_argument("--out", help="output path (default: standard output)")

    verify = sub.add_parser("verify", help="run the Gray checks on a profile document")
    verify.add_argument("--in", dest="inp", required=True)
    verify.add_argument("--out")
    verify.add_argument("--n-geodesics", type=int, default=0, help="geodesics to integrate (n = 2 only; 0 skips)")
    verify.add_argument("--steps", type=int, default=10_000)
    verify.add_argument("--horizon", type=float, default=1.0)
    verify.add_argument("--seed", type=int, default=0)

    ident = sub.add_parser("identities", help="exact identity certification report")
    ident.add_argument("--n-max", type=int, default=12)
    ident.add_argument("--out")

    geo = sub.add_parser("geodesic-check", help="Killing-tensor test along random geodesics (n = 2)")
    geo.add_argument("--in", dest="inp", required=True)
    geo.add_argument("--out")
    geo.add_argument("--n-geodesics", type=int, default=20)
    geo.add_argument("--steps", type=int, default=10_000)
    geo.add_argument("--horizon", type=float, default=1.0)
    geo.add_argument("--seed", type=int, default=0)
    geo.add_argument("--trace", help="optional per-step trace CSV path")

    sweep = sub.add_parser("sweep", help="map the existence region over a parameter grid")
    case_flags(sweep)
    sweep.add_argument("--q", type=int, help="kaehler: use s = 2k/q for k = 1..k-max")
    sweep.add_argument("--k-max", type=int, help="kaehler: largest k (default 2q)")
    sweep.add_argument("--polynomial", choices=("compat", "phi"), default="compat",
                       help="kaehler: decide existence by the compatibility polynomial or by phi")
    sweep.add_argument("--out")

    export = sub.add_parser("export", help="export a profile document as CSV or SVG")
    export.add_argument("--in", dest="inp", required=True)
    export.add_argument("--out", required=True)
    export.add_argument("--format", choices=("csv", "svg", "json"), default="csv")
    return p


# --------------------------------------------------------------------------
# helpers


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from exc


def _read_profile(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        return ser.read_profile_document(ser.loads(text))
    except (ser.DocumentError, GrayforgeError) as exc:
        raise InputError(str(exc)) from exc


def _need(args, name: str):
    value = getattr(args, name)
    if value is None:
        raise UsageError(f"--{name.replace('_', '-')} is required for --case {args.case}")
    return value


def _int_flag(text, name):
    try:
        return int(text)
    except (TypeError, ValueError):
        raise InputError(f"--{name} must be an integer, got {text!r}") from None


def _x_value(text):
    return None if text is None else float(_rational(text))


def solve_case(args, case: CaseTag, n: int, cfg: BoundarySearchConfig) -> SolutionSpec:
    """Dispatch one solve to the boundary module."""
    eps = None if args.epsilon is None else _int_flag(args.epsilon, "epsilon")
    if case is CaseTag.KAEHLER:
        s = _rational(_need(args, "s"))
        x = _x_value(args.x) or 1.0
        return kaehler_solve(n, s, x, cfg, epsilon=1 if eps is None else eps)
    if case is CaseTag.SPHERE_BUNDLE:
        s = _rational(_need(args, "s"))
        A = _int_flag(_need(args, "A"), "A")
        eps = 1 if eps is None else eps
        x = _x_value(_need(args, "x"))
        if args.symmetric if hasattr(args, "symmetric") else False:
            if A != -1:
                raise UsageError("--symmetric needs --A -1")
            return symmetric_solve(n, eps * A, s / 2, x)
        return sphere_bundle_solve(n, eps * A, s / 2, x, A, cfg)
    if case is CaseTag.PROJECTIVE_SPACE:
        A = _int_flag(_need(args, "A"), "A")
        return cpn_solve(n, A, cfg, x=_x_value(args.x))
    eps = _int_flag(_need(args, "epsilon"), "epsilon")
    c = None if args.c is None else _rational(args.c)
    return product_solve(n, eps, c=c, x=_x_value(args.x), cfg=cfg)


# --------------------------------------------------------------------------
# commands


def run_solve(cfg: RunConfig) -> int:
    a = cfg.args
    case = CaseTag.parse(a.case)
    n = _int_flag(a.n, "n")
    if a.grid_size < 4:
        raise UsageError("--grid-size must be at least 4")
    spec = solve_case(a, case, n, cfg.search)
    grid = Profile(spec).grid(a.grid_size)
    _emit(ser.dumps(ser.profile_document(spec, grid)), a.out)
    return EXIT_OK


def _check(value: float, tol: float) -> dict:
    return {"value": value, "tol": tol, "pass": bool(np.isfinite(value) and value <= tol)}


def grid_consistency(spec: SolutionSpec, grid) -> float:
    """Largest relative gap between the stored arrays and a fresh reconstruction."""
    fresh = Profile(spec).evaluate(grid.t, polish=True)
    worst = 0.0
    inner = slice(1, -1)
    for name in ("f", "g", "fPrime", "gPrime", "fSecond", "gSecond"):
        stored = getattr(grid, name)[inner]
        new = fresh[name][inner]
        scale = max(float(np.max(np.abs(new))), 1e-300)
        worst = max(worst, float(np.max(np.abs(stored - new)) / scale))
    return worst


def verification_document(params, spec, grid, geodesics=None, n_geodesics=0, steps=10_000, horizon=1.0, seed=0):
    report = gray_criteria(grid, spec)
    checks = {
        "lambdaGap01": _check(report.lambdaGap01, TOLERANCES["lambdaGap01"]),
        "grayDefect": _check(report.grayDefect, TOLERANCES["grayDefect"]),
        "muQuadResidual": _check(report.muQuadResidual, TOLERANCES["muQuadResidual"]),
        "prop2aDefect": _check(report.prop2aDefect, TOLERANCES["prop2aDefect"]),
        "constraintDefect": _check(report.constraintDefect, TOLERANCES["constraintDefect"]),
        "gridConsistency": _check(grid_consistency(spec, grid), TOLERANCES["gridConsistency"]),
    }
    smooth = smoothness_check(Profile(spec))
    geo_doc = None
    if n_geodesics > 0:
        if params.n != 2:
            raise UsageError("geodesic checks need n = 2")
        from .coordmodel.checks import geodesic_check

        geo = geodesic_check(Profile(spec), spec, count=n_geodesics, steps=steps, horizon=horizon, seed=seed)
        geo_doc = geo.to_dict()
        checks["speedDrift"] = _check(geo.speedDrift, TOLERANCES["speedDrift"])
        checks["killingDrift"] = _check(geo.killingDrift, TOLERANCES["killingDrift"])
    failing = [k for k, v in checks.items() if not v["pass"]]
    failing += [f"smoothness:{k}" for k in smoothness_failures(smooth)]
    return {
        "schemaVersion": ser.SCHEMA_VERSION,
        "kind": "verification",
        "params": params.to_dict(),
        "spec": spec.to_dict(),
        "curvature": report.summary(),
        "checks": checks,
        "geodesics": geo_doc,
        "smoothness": smooth,
        "verdict": VERDICT_OK if not failing else VERDICT_FAILED,
        "failing": failing,
    }


def run_verify(cfg: RunConfig) -> int:
    a = cfg.args
    params, spec, grid = _read_profile(a.inp)
    doc = verification_document(params, spec, grid, n_geodesics=a.n_geodesics, steps=a.steps, horizon=a.horizon, seed=a.seed)
    _emit(ser.dumps(doc), a.out)
    if doc["verdict"] != VERDICT_OK:
        print(f"verdict FAILED: {', '.join(doc['failing'])}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def run_identities(cfg: RunConfig) -> int:
    a = cfg.args
    if a.n_max < 2:
        raise UsageError("--n-max must be at least 2")
    entries = identity_suite(a.n_max)
    doc = [{"identity": e.identity, "n": e.n, "status": e.status, "detail": e.detail} for e in entries]
    _emit(ser.dumps(doc), a.out)
    failed = [e for e in entries if not e.passed]
    if failed:
        print(f"{len(failed)} of {len(entries)} identities failed", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def run_geodesic_check(cfg: RunConfig) -> int:
    from .coordmodel.checks import geodesic_check

    a = cfg.args
    params, spec, _ = _read_profile(a.inp)
    if params.n != 2:
        raise UsageError("geodesic-check needs n = 2")
    rep = geodesic_check(Profile(spec), spec, count=a.n_geodesics, steps=a.steps, horizon=a.horizon,
                         seed=a.seed, trace=a.trace is not None)
    doc = rep.to_dict()
    doc["checks"] = {
        "speedDrift": _check(rep.speedDrift, TOLERANCES["speedDrift"]),
        "killingDrift": _check(rep.killingDrift, TOLERANCES["killingDrift"]),
    }
    _emit(ser.dumps(doc), a.out)
    if a.trace is not None:
        rows = [(r[0], r[1], *r[2:]) for r in rep.trace]
        _emit(ser.csv_table(("step", "geodesic", "t", "psi", "u", "v", "speed", "phi"), rows), a.trace)
    return EXIT_OK if all(c["pass"] for c in doc["checks"].values()) else EXIT_FAILED


SWEEP_HEADER = ("case", "n", "epsilon", "A", "s_or_c", "exists", "root_or_reason")
DEFAULT_PRODUCT_C = (Fraction(11, 10), Fraction(3, 2), Fraction(2), Fraction(3), Fraction(5))


def _sweep_kaehler(a, ns, eps_list, cfg) -> list[tuple]:
    if a.s is not None:
        s_values = _rational_list(a.s)
    elif a.q is not None:
        k_max = a.k_max if a.k_max is not None else 2 * a.q
        s_values = [Fraction(2 * k, a.q) for k in range(1, k_max + 1)]
    else:
        raise UsageError("kaehler sweep needs --s or --q")
    rows = []
    for n in ns:
        for eps in eps_list:
            for s in sorted(set(s_values)):
                if a.polynomial == "phi":
                    cert = kaehler_existence(n, s, eps, "phi", int(cfg.bracketMax))
                    wit = ";".join(format_rational(w) for w in cert.witness) if cert.witness else cert.reason
                    rows.append(("kaehler", n, eps, 0, format_rational(s), int(cert.exists), wit))
                    continue
                try:
                    spec = kaehler_solve(n, s, 1.0, cfg, epsilon=eps)
                    rows.append(("kaehler", n, eps, 0, format_rational(s), 1, ser.format_float(spec.family)))
                except NoRoot as exc:
                    rows.append(("kaehler", n, eps, 0, format_rational(s), 0, _reason(exc)))
    return rows


def _reason(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}".replace(",", ";").replace("\n", " ")


def _sweep_product(a, ns, eps_list, cfg) -> list[tuple]:
    c_values = _rational_list(a.c) if a.c is not None else list(DEFAULT_PRODUCT_C)
    rows = []
    for n in ns:
        for eps in eps_list:
            if eps == 0:
                try:
                    spec = product_solve(n, 0, cfg=cfg)
                    rows.append(("product", n, 0, 1, ser.format_float(spec.family), 1, "root of F"))
                except NoRoot as exc:
                    rows.append(("product", n, 0, 1, "-", 0, _reason(exc)))
                continue
            for c in sorted(set(c_values)):
                try:
                    spec = product_solve(n, eps, c=c, cfg=cfg)
                    rows.append(("product", n, eps, 1, format_rational(c), 1, f"x={ser.format_float(spec.x)}"))
                except (NoRoot, GrayforgeError) as exc:
                    rows.append(("product", n, eps, 1, format_rational(c), 0, _reason(exc)))
    return rows


def run_sweep(cfg: RunConfig) -> int:
    a = cfg.args
    case = CaseTag.parse(a.case)
    ns = _int_range(a.n)
    eps_list = _int_range(a.epsilon) if a.epsilon is not None else ([1] if case is CaseTag.KAEHLER else [-1, 0, 1])
    if case is CaseTag.KAEHLER:
        rows = _sweep_kaehler(a, ns, eps_list, cfg.search)
    elif case is CaseTag.PRODUCT:
        rows = _sweep_product(a, ns, eps_list, cfg.search)
    else:
        raise UsageError("sweep supports --case kaehler and --case product")
    _emit(ser.csv_table(SWEEP_HEADER, rows), a.out)
    return EXIT_OK


def run_export(cfg: RunConfig) -> int:
    a = cfg.args
    params, spec, grid = _read_profile(a.inp)
    if a.format == "csv":
        text = ser.grid_csv(grid)
    elif a.format == "json":
        text = ser.dumps(ser.profile_document(spec, grid))
    else:
        lam0, lam1, lam2 = ricci_eigenvalue_arrays(grid)
        mask = interior_mask(grid) & np.isfinite(lam0) & np.isfinite(lam2)
        # lambda - 2 mu on the interior; the axis samples are undefined
        gray = np.where(mask, 0.5 * (lam0 + lam1) - 2 * lam2, np.nan)
        text = ser.profile_svg(grid.t, {"f": grid.f, "g": grid.g, "z": grid.z, "lambda-2mu": gray})
    _emit(text, a.out)
    return EXIT_OK


COMMANDS = {
    "solve": run_solve,
    "verify": run_verify,
    "identities": run_identities,
    "geodesic-check": run_geodesic_check,
    "sweep": run_sweep,
    "export": run_export,
}


_NEGATIVE = re.compile(r"^-\d")


def _attach_negative_values(argv: list[str]) -> list[str]:
    """Rewrite ``--x -1/10`` as ``--x=-1/10``.

    argparse only recognizes plain negative decimals as values, so a
    negative rational would otherwise be taken for an unknown flag.
    """
    out: list[str] = []
    for token in argv:
        if out and _NEGATIVE.match(token) and out[-1].startswith("--") and "=" not in out[-1]:
            out[-1] = f"{out[-1]}={token}"
        else:
            out.append(token)
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = _attach_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required")
        return COMMANDS[args.command](RunConfig(args.command, args))
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NoRoot as exc:
        print(f"no root: {exc}", file=sys.stderr)
        return EXIT_NO_ROOT
    except (GrayforgeError, ValueError) as exc:
        print(f"validation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
