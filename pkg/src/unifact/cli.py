"""Command line driver.

    unifact verify-identities --k 6
    unifact eliminate --matrix '[[2,1],[1,1]]'
    unifact example circle --out problem.json
    unifact split --input problem.json [--functions fs.json]
    unifact factor --input problem.json --out cert.json [--config cfg.json]
    unifact check --input problem.json --cert cert.json
    unifact exponentialize --cert cert.json --out exp.json

Results are printed as tab-separated key/value lines; ``--plot DIR`` also
writes SVG figures and the same lines to DIR/summary.tsv.
Exit status: 0 pass, 2 verification failure, 3 stage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from . import linalg as la
from .errors import StageError

EXIT_OK, EXIT_FAIL, EXIT_STAGE = 0, 2, 3


def _load_json(arg: str):
    s = arg.strip()
    if s.startswith(("[", "{")):
        return json.loads(s)
    with open(arg) as fh:
        return json.load(fh)


def _write(path: str, text: str):
    with open(path, "w") as fh:
        fh.write(text)


def _parse_entry(v, exact_backend: bool):
    """Numbers, "p/q" strings, [re, im] pairs; exact backend keeps rationals."""
    from .exact import ExactComplex
    if isinstance(v, list):
        re, im = (_parse_entry(x, exact_backend) for x in v)
        return ExactComplex(re, im) if exact_backend else complex(re) + 1j * complex(im)
    if isinstance(v, str):
        v = Fraction(v)
    elif exact_backend and isinstance(v, float):
        v = Fraction(v).limit_denominator(10 ** 12)
    if exact_backend:
        return Fraction(v)
    return complex(v)


def _emit(rows: list, plot_dir: str | None):
    for k, v in rows:
        print(f"{k}\t{v}")
    if plot_dir:
        from .plotting import write_tsv
        write_tsv(rows, plot_dir)


def _config(args):
    from .pipeline import RunConfig
    data = _load_json(args.config) if getattr(args, "config", None) else {}
    for k in ("tol", "epsilon", "backend"):
        v = getattr(args, k, None)
        if v is not None:
            data[k] = v
    return RunConfig.from_json(data)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_verify_identities(args) -> int:
    from .identities import identity_report
    rep = identity_report(args.k, args.samples, args.seed)
    js = rep.to_json()
    if args.out:
        _write(args.out, json.dumps(js, sort_keys=True, indent=1))
    rows = [("format", "identity-report-v1"), ("k_max", args.k)]
    for q in rep.q_checks:
        for e in q["identities"]:
            rows.append((f"k={q['k']} {e['name']}", "PASS" if e["passed"] else "FAIL"))
    for g in rep.gradient_checks:
        rows.append((f"n={g['n']} singular set", "PASS" if g["passed"] else "FAIL"))
    rows.append(("passed", rep.passed))
    if args.plot:
        from .plotting import plot_identities
        plot_identities(rep, args.plot)
    _emit(rows, args.plot)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_eliminate(args) -> int:
    from .elimination import eliminate_four
    exact_backend = args.backend == "exact"
    rows_in = _load_json(args.matrix)
    A = la.Mat2.from_rows([[_parse_entry(v, exact_backend) for v in r] for r in rows_in])
    q = eliminate_four(A, args.delta)
    P = q.product()
    err = (P - A).op_norm()
    tol = 0.0 if exact_backend else args.tol
    rows = [("backend", args.backend)]
    for k, z in enumerate(q.as_tuple(), 1):
        rows.append((f"z{k}", z))
    rows.append(("residual", err))
    rows.append(("passed", err <= tol))
    if args.plot:
        from .plotting import plot_elimination
        plot_elimination(A, q, args.plot)
    _emit(rows, args.plot)
    return EXIT_OK if err <= tol else EXIT_FAIL


def cmd_example(args) -> int:
    from .examples import EXAMPLES
    if args.name not in EXAMPLES:
        print(f"unknown example {args.name!r}; choose from {sorted(EXAMPLES)}", file=sys.stderr)
        return 1
    P = EXAMPLES[args.name]()
    _write(args.out, json.dumps(P.to_json()))
    _emit([("example", args.name), ("written", args.out)], None)
    return EXIT_OK


def _problem(path: str):
    from .pipeline import Problem
    return Problem.from_json(_load_json(path))


def cmd_split(args) -> int:
    from .fields import ScalarField
    from .splitting import reconstruction_residual, split_general
    P = _problem(args.input)
    if args.functions:
        fs = [ScalarField.from_json(b).values for b in _load_json(args.functions)]
    else:
        fs = [p.f for p in P.pairs]
    masks = [np.abs(f) <= 1e-12 for f in fs]
    factors = split_general(P.F, P.Ft, masks, args.radius, args.tol)
    rr = reconstruction_residual(factors, P.F, P.Ft)
    nulls = [g.strong_nullity() for g in factors]
    bound = len(factors) * 1e-12
    ok = rr["end"] <= bound and rr["frames"] <= bound and max(nulls) <= 1e-12
    rows = [("factors", len(factors)), ("residual_end", rr["end"]), ("residual_frames", rr["frames"])]
    rows += [(f"strong_nullity_{k + 1}", v) for k, v in enumerate(nulls)]
    rows.append(("passed", ok))
    if args.plot:
        from .plotting import plot_split
        plot_split(factors, P.domain, args.plot)
    _emit(rows, args.plot)
    return EXIT_OK if ok else EXIT_FAIL


def _cert_rows(cert) -> list:
    return [("K", cert.K), ("residual", cert.residual), ("tolerance", cert.tolerance),
            ("det_drift", cert.det_drift), ("unipotent_defect", cert.unipotent_defect),
            ("interpolation_defect", cert.interpolation_defect), ("digest", cert.digest)]


def cmd_factor(args) -> int:
    from .pipeline import factor_automorphism
    P = _problem(args.input)
    cert = factor_automorphism(P, _config(args))
    if args.out:
        _write(args.out, cert.dumps())
    if args.plot:
        from .plotting import plot_factors, plot_residual, plot_subdivision
        plot_residual(P, cert, args.plot)
        plot_factors(cert, args.plot)
        plot_subdivision(cert, args.plot)
    _emit(_cert_rows(cert) + [("passed", cert.passed)], args.plot)
    return EXIT_OK if cert.passed else EXIT_FAIL


def cmd_check(args) -> int:
    from .pipeline import FactorizationCertificate, verify_certificate
    P = _problem(args.input)
    cert = FactorizationCertificate.from_json(_load_json(args.cert))
    rep = verify_certificate(P, cert, args.tol)
    rows = [("K", rep["K"]), ("residual", rep["residual"]), ("tolerance", rep["tolerance"]),
            ("det_drift", rep["det_drift"]), ("unipotent_defect", rep["unipotent_defect"]),
            ("worst_sample", json.dumps(rep["worst_sample"])), ("violations", len(rep["violations"])),
            ("digest_matches", rep["digest_matches"]), ("passed", rep["passed"])]
    for v in rep["violations"][:10]:
        rows.append((f"violation_factor_{v['factor']}", f"pair={v['pair']} samples={v['samples']} max_h={v['max_h']:.3e}"))
    if args.plot:
        from .plotting import plot_factors, plot_residual
        plot_residual(P, cert, args.plot)
        plot_factors(cert, args.plot)
    _emit(rows, args.plot)
    return EXIT_OK if rep["passed"] else EXIT_FAIL


def cmd_exponentialize(args) -> int:
    from .pipeline import FactorizationCertificate, exponentialize
    cert = FactorizationCertificate.from_json(_load_json(args.cert))
    out = exponentialize(cert)
    if args.out:
        _write(args.out, out.dumps())
    _emit([("kind", out.kind), ("K", out.K)], args.plot)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="unifact", description="unipotent factorization of SL(2) bundle automorphisms")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p):
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--epsilon", type=float, default=None)
        p.add_argument("--backend", choices=("float", "exact"), default=None)
        p.add_argument("--plot", metavar="DIR", default=None)
        return p

    p = common(sub.add_parser("verify-identities"))
    p.add_argument("--k", type=int, default=6)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_verify_identities)

    p = common(sub.add_parser("eliminate"))
    p.add_argument("--matrix", required=True, help="JSON 2x2 (file or inline)")
    p.add_argument("--delta", type=float, default=1e-6)
    p.set_defaults(fn=cmd_eliminate)

    p = common(sub.add_parser("example"))
    p.add_argument("name")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_example)

    p = common(sub.add_parser("split"))
    p.add_argument("--input", required=True)
    p.add_argument("--functions", default=None)
    p.add_argument("--radius", type=int, default=3)
    p.set_defaults(fn=cmd_split)

    p = common(sub.add_parser("factor"))
    p.add_argument("--input", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_factor)

    p = common(sub.add_parser("check"))
    p.add_argument("--input", required=True)
    p.add_argument("--cert", required=True)
    p.set_defaults(fn=cmd_check)

    p = common(sub.add_parser("exponentialize"))
    p.add_argument("--cert", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_exponentialize)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.cmd in ("eliminate", "split"):
        args.tol = 1e-10 if args.tol is None else args.tol
        args.backend = args.backend or "float"
    try:
        return args.fn(args)
    except StageError as e:
        print(f"stage error\t{e.stage or '-'}\t{type(e).__name__}\t{e}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
