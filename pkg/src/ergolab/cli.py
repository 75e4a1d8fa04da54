"""Command-line front end: ``ergolab <subcommand> ...``.

Exit codes: 0 pass (or independent / found), 1 fail (or not independent /
not found), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from decimal import Decimal, InvalidOperation
from pathlib import Path

import numpy as np

from ergolab import averages, combinatorics, dynamics, polyfam
from ergolab.averages import AverageRequest, Scheme
from ergolab.dynamics import CompatibilityError
from ergolab.polyfam import ParseError, PolynomialFamily, infer_basis, parse_polynomial
from ergolab.symreal import BasisError, format_rational, parse_symreal

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def count(text: str) -> int:
    """Integer from ``100000`` or ``1e5`` (floored)."""
    try:
        return int(Decimal(text).to_integral_value(rounding="ROUND_FLOOR"))
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def count_list(text: str) -> list[int]:
    return [count(t) for t in text.split(",") if t.strip()]


def default_schedule(N: int) -> list[int]:
    cps = [10**j for j in range(3, 19) if 10**j < N]
    return cps + [N]


# argument groups -----------------------------------------------------------

def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "tsv"), default="json", help="report format")


def _add_system(p: argparse.ArgumentParser) -> None:
    p.add_argument("--system", default="torus",
                   help="torus | cyclic | affine | heisenberg, or a JSON system descriptor")
    p.add_argument("--alpha", default="sqrt(2)",
                   help="rotation number(s), comma-separated for higher-dimensional tori")
    p.add_argument("--b", help="Heisenberg element as three comma-separated reals")
    p.add_argument("--m", type=int, help="modulus of the cyclic system")
    p.add_argument("--a", type=int, default=1, help="step of the cyclic system")


def _add_schedule(p: argparse.ArgumentParser, default_N: str = "1e5") -> None:
    p.add_argument("--N", type=count, default=count(default_N), help="last checkpoint (1e5 style accepted)")
    p.add_argument("--checkpoints", type=count_list,
                   help="comma-separated checkpoints (default: powers of ten below N, then N)")


def _add_scheme(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scheme", choices=averages.SCHEME_KINDS, default="cesaro")
    p.add_argument("--M", type=count, default=0, help="start offset of the uniform scheme")
    p.add_argument("--w", type=int, help="w of the W-trick")
    p.add_argument("--r", type=int, help="residue r of the W-trick")


def _add_sampling(p: argparse.ArgumentParser) -> None:
    p.add_argument("--backend", choices=("auto", "exact", "sampling"), default="auto")
    p.add_argument("--grid", type=int, default=averages.DEFAULT_GRID,
                   help="number of lattice start points for the sampling backend")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ergolab",
                                     description="Finite-scale experiments on polynomial ergodic averages.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("check-independence", help="decide strong independence of a family")
    p.add_argument("family", nargs="+", help="polynomials in t, e.g. 'sqrt(2)*t^2+t'")
    p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("weyl", help="normalized Weyl sums of e(q(n))")
    p.add_argument("--poly", required=True, help="polynomial q(t)")
    _add_schedule(p, "1e4")
    _add_output(p)

    p = sub.add_parser("average", help="multiple ergodic average along [p_i(n)]")
    _add_system(p)
    p.add_argument("--family", nargs="+", required=True, help="iterate polynomials p_1 .. p_l")
    p.add_argument("--obs", nargs="+", required=True, help="observables f_1 .. f_l")
    _add_scheme(p)
    _add_schedule(p)
    _add_sampling(p)
    _add_output(p)

    p = sub.add_parser("furstenberg", help="average along i[q(n)] against the linear reference")
    _add_system(p)
    p.add_argument("--q", required=True, help="polynomial q(t)")
    p.add_argument("--ell", type=int, required=True, help="number of iterates")
    p.add_argument("--obs", nargs="+", required=True, help="observables f_1 .. f_l")
    _add_scheme(p)
    _add_schedule(p)
    _add_sampling(p)
    _add_output(p)

    p = sub.add_parser("equidistribution", help="character and box discrepancy of a product orbit")
    _add_system(p)
    p.add_argument("--family", nargs="+", required=True)
    p.add_argument("--N", type=count, default=count("1e4"))
    p.add_argument("--H", type=int, default=5, help="largest frequency (sup norm)")
    p.add_argument("--grid", type=int, default=10, help="cells per coordinate")
    _add_output(p)

    p = sub.add_parser("wtrick", help="W-trick discrepancy, maximized over residues")
    _add_system(p)
    p.add_argument("--family", nargs="+", required=True)
    p.add_argument("--obs", nargs="+", required=True)
    p.add_argument("--w", type=int, required=True)
    _add_schedule(p)
    _add_sampling(p)
    _add_output(p)

    p = sub.add_parser("recurrence", help="recurrence profile of a set against the density bound")
    p.add_argument("--set", required=True, help="evens | odds | all | primes | 'beatty <alpha> <v> [<u>]' | file")
    p.add_argument("--N", type=count, default=count("1e5"), help="window length")
    p.add_argument("--family", nargs="+", required=True)
    p.add_argument("--nmax", type=count, required=True)
    p.add_argument("--mode", choices=("all", "prime"), default="all")
    p.add_argument("--tolerance", type=float, default=0.0, help="finite-n allowance below the bound")
    _add_output(p)

    p = sub.add_parser("configurations", help="search m, m + [p_i(n)] inside a set")
    p.add_argument("--set", required=True, help="evens | odds | all | primes | 'beatty <alpha> <v> [<u>]' | file")
    p.add_argument("--N", type=count, default=count("1e4"), help="window length")
    p.add_argument("--family", nargs="+", required=True)
    p.add_argument("--nmax", type=count, required=True)
    p.add_argument("--mode", choices=("all", "prime"), default="all")
    _add_output(p)

    p = sub.add_parser("counterexample-search", help="cyclic groups violating the recurrence bound")
    p.add_argument("--m", type=int, default=8, help="largest modulus (at most 16)")
    p.add_argument("--poly", default="t^2", help="integer polynomial")
    p.add_argument("--ell", type=int, default=1)
    _add_output(p)

    p = sub.add_parser("gowers", help="uniformity norm of a function on Z/m")
    p.add_argument("--values", help="comma-separated (complex) values f(0), f(1), ...")
    p.add_argument("--m", type=int, help="modulus, with --obs evaluated at r/m")
    p.add_argument("--obs", help="observable on the circle, e.g. 'e(x)'")
    p.add_argument("--k", type=int, default=2)
    _add_output(p)
    return parser


# builders ------------------------------------------------------------------

def _reals(text: str) -> tuple:
    """Comma-separated reals over one shared basis."""
    parts = [t.strip() for t in text.split(",")]
    basis = infer_basis(parts)
    return tuple(parse_symreal(t, basis) for t in parts)


def make_system(args) -> dynamics.System:
    spec = args.system.strip()
    if spec.startswith("{"):
        return dynamics.system_from_descriptor(json.loads(spec))
    if spec == "torus":
        return dynamics.TorusRotation(_reals(args.alpha))
    if spec == "affine":
        (alpha,) = _reals(args.alpha)
        return dynamics.AffineSkewSystem(alpha)
    if spec == "cyclic":
        if args.m is None:
            raise UsageError("--system cyclic needs --m")
        return dynamics.CyclicSystem(args.m, args.a)
    if spec == "heisenberg":
        if not args.b:
            raise UsageError("--system heisenberg needs --b")
        parts = _reals(args.b)
        if len(parts) != 3:
            raise UsageError("--b needs three comma-separated coordinates")
        return dynamics.HeisenbergSystem(dynamics.HeisenbergElement(*parts))
    raise UsageError(f"unknown system {spec!r}")


def make_observables(system, texts) -> tuple:
    dim = dynamics.observable_dim(system)
    return tuple(dynamics.parse_observable(t, dim) for t in texts)


def make_scheme(args) -> Scheme:
    if args.scheme == "w_tricked" and (args.w is None or args.r is None):
        raise UsageError("--scheme w_tricked needs --w and --r")
    return Scheme(args.scheme, args.M, args.w, args.r)


def schedule(args) -> list[int]:
    return args.checkpoints if args.checkpoints else default_schedule(args.N)


def emit(args, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2)


def _tsv(header: list[str], rows: list[list]) -> str:
    lines = ["\t".join(header)] + ["\t".join(str(v) for v in row) for row in rows]
    return "\n".join(lines)


# commands ------------------------------------------------------------------

def cmd_check_independence(args) -> int:
    fam = PolynomialFamily.from_strings(args.family)
    verdict = polyfam.is_strongly_independent(fam)
    if args.format == "json":
        print(_json(verdict.to_dict()))
    elif verdict.independent:
        print("independent")
    else:
        print("not independent")
        print("lambda: " + ", ".join(str(x) for x in verdict.witness))
        print("rho: " + ", ".join(format_rational(q) for q in verdict.rho))
    return EXIT_PASS if verdict.independent else EXIT_FAIL


def cmd_weyl(args) -> int:
    q = parse_polynomial(args.poly)
    cps = schedule(args)
    values = averages.weyl_sums(q, cps)
    ok = averages.trend_ok([abs(v) for v in values])
    if args.format == "tsv":
        emit(args, _tsv(["N", "re", "im", "abs"], [[N, repr(v.real), repr(v.imag), repr(abs(v))]
                                                  for N, v in zip(cps, values)]))
    else:
        emit(args, _json({"poly": polyfam.format_polynomial(q),
                          "checkpoints": [{"N": N, "value": [v.real, v.imag], "abs": abs(v)}
                                          for N, v in zip(cps, values)],
                          "trend": "pass" if ok else "fail"}))
    return EXIT_PASS if ok else EXIT_FAIL


def _emit_report(args, report: averages.ConvergenceReport) -> int:
    emit(args, report.to_tsv() if args.format == "tsv" else report.to_json())
    return EXIT_PASS if report.trend else EXIT_FAIL


def cmd_average(args) -> int:
    system = make_system(args)
    fam = PolynomialFamily.from_strings(args.family)
    obs = make_observables(system, args.obs)
    if len(obs) != len(fam):
        raise UsageError(f"{len(fam)} polynomials but {len(obs)} observables")
    req = AverageRequest(system, fam, obs, make_scheme(args), tuple(schedule(args)),
                         backend=args.backend, grid=args.grid)
    return _emit_report(args, averages.multi_ergodic_average(req))


def cmd_furstenberg(args) -> int:
    system = make_system(args)
    q = parse_polynomial(args.q)
    obs = make_observables(system, args.obs)
    if len(obs) != args.ell:
        raise UsageError(f"--ell {args.ell} but {len(obs)} observables")
    report = averages.furstenberg_average(system, q, args.ell, obs, make_scheme(args), schedule(args),
                                          backend=args.backend, grid=args.grid)
    return _emit_report(args, report)


def cmd_equidistribution(args) -> int:
    system = make_system(args)
    fam = PolynomialFamily.from_strings(args.family)
    rep = averages.equidistribution_test(system, fam, args.N, args.H, args.grid)
    d = rep.to_dict()
    if args.format == "tsv":
        emit(args, _tsv(list(d), [[json.dumps(v) if isinstance(v, list) else v for v in d.values()]]))
    else:
        emit(args, _json(d))
    return EXIT_PASS if rep.equidistributed else EXIT_FAIL


def cmd_wtrick(args) -> int:
    system = make_system(args)
    fam = PolynomialFamily.from_strings(args.family)
    obs = make_observables(system, args.obs)
    if len(obs) != len(fam):
        raise UsageError(f"{len(fam)} polynomials but {len(obs)} observables")
    rep = averages.wtrick_discrepancy(system, fam, obs, args.w, schedule(args),
                                      backend=args.backend, grid=args.grid)
    if args.format == "tsv":
        emit(args, _tsv(["N", "discrepancy"], [[N, repr(d)] for N, d in zip(rep.checkpoints, rep.discrepancy)]))
    else:
        emit(args, _json(rep.to_dict()))
    return EXIT_PASS if rep.trend else EXIT_FAIL


def cmd_recurrence(args) -> int:
    E = combinatorics.parse_set(args.set, args.N)
    fam = PolynomialFamily.from_strings(args.family)
    prof = combinatorics.recurrence_profile(E, fam, args.nmax, args.mode, args.tolerance)
    d = prof.to_dict()
    emit(args, _tsv(list(d), [list(d.values())]) if args.format == "tsv" else _json(d))
    return EXIT_PASS if prof.passed else EXIT_FAIL


def cmd_configurations(args) -> int:
    E = combinatorics.parse_set(args.set, args.N)
    fam = PolynomialFamily.from_strings(args.family)
    conf = combinatorics.find_configuration(E, fam, args.nmax, args.mode)
    if conf is None:
        emit(args, _tsv(["m", "n", "offsets"], []) if args.format == "tsv" else _json({"found": False}))
        return EXIT_FAIL
    valid = combinatorics.validate_configuration(E, fam, conf)
    if args.format == "tsv":
        emit(args, _tsv(["m", "n", "offsets"], [[conf.m, conf.n, ",".join(map(str, conf.offsets))]]))
    else:
        emit(args, _json({"found": True, **conf.to_dict(), "valid": valid}))
    return EXIT_PASS if valid else EXIT_FAIL


def _integer_coeffs(text: str) -> list[int]:
    p = parse_polynomial(text)
    coeffs = []
    for c in p.coefficients:
        q = c.rational_part()
        if not c.is_rational() or q.denominator != 1:
            raise UsageError("counterexample-search needs an integer polynomial")
        coeffs.append(int(q))
    return coeffs or [0]


def cmd_counterexample_search(args) -> int:
    found = combinatorics.cyclic_counterexample_search(args.m, _integer_coeffs(args.poly), ell=args.ell)
    if args.format == "tsv":
        emit(args, _tsv(["m", "A", "average", "bound"],
                        [[v.m, ",".join(map(str, v.A)), v.average, v.bound] for v in found]))
    else:
        emit(args, _json({"poly": args.poly, "violations": [v.to_dict() for v in found]}))
    return EXIT_PASS


def cmd_gowers(args) -> int:
    if args.values:
        values = np.array([complex(t.strip()) for t in args.values.split(",")])
    elif args.m and args.obs:
        f = dynamics.parse_observable(args.obs, 1)
        values = dynamics.evaluate_observable(f, (np.arange(args.m) / args.m)[:, None])
    else:
        raise UsageError("give --values, or --m together with --obs")
    norm = averages.gowers_norm(values, args.k)
    if args.format == "tsv":
        emit(args, _tsv(["m", "k", "norm"], [[values.size, args.k, repr(norm)]]))
    else:
        emit(args, _json({"m": int(values.size), "k": args.k, "norm": norm}))
    return EXIT_PASS


COMMANDS = {
    "check-independence": cmd_check_independence,
    "weyl": cmd_weyl,
    "average": cmd_average,
    "furstenberg": cmd_furstenberg,
    "equidistribution": cmd_equidistribution,
    "wtrick": cmd_wtrick,
    "recurrence": cmd_recurrence,
    "configurations": cmd_configurations,
    "counterexample-search": cmd_counterexample_search,
    "gowers": cmd_gowers,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ParseError, BasisError, CompatibilityError, ValueError, ArithmeticError) as exc:
        print(f"ergolab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
