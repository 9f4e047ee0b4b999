"""Batch command-line front end.

Loads cocycle files, runs certifications and experiments, and writes
machine-readable reports (JSON) and tabular series (CSV).  Exit codes:
0 success, 2 informative negative (a certificate or experiment said no),
1 error (bad input or unexpected failure).  Output files are written
atomically (temp file then rename) and all sampled modes require a seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import analysis, synthesis, thermo, typicality
from .cocycle import load_cocycle, save_cocycle
from .demos import DEMOS, get_demo
from .errors import (CoproxError, InputFormatError, NotConstant,
                     SynthesisFailed, TransversalityFailed)

SCHEMA_PREFIX = "coprox"
REPORT_VERSION = "1"


def _schema(kind: str) -> str:
    return f"{SCHEMA_PREFIX}/{kind}/{REPORT_VERSION}"


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".coprox-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: str, kind: str, payload: dict) -> None:
    doc = {"schema": _schema(kind), **payload}
    _atomic_write(path, json.dumps(doc, indent=1, sort_keys=True) + "\n")


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(path: str, kind: str, header: list[str], rows) -> None:
    lines = [f"# schema={_schema(kind)}", ",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def _positive_int(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _word(text: str):
    if not text or not text.isdigit():
        raise argparse.ArgumentTypeError("word must be a nonempty digit string")
    return tuple(int(c) for c in text)


def _find_pair(A, tol: float, cap: int, collections: str = "all"):
    return typicality.find_typical_pair(
        A, max_excursion_len=cap, tol=tol, exterior_collections=collections)


def cmd_demo(args) -> int:
    A = get_demo(args.name)
    save_cocycle(A, args.out)
    print(f"wrote demo '{args.name}' to {args.out}")
    return 0


def cmd_check(args) -> int:
    A = load_cocycle(args.input)
    found = _find_pair(A, args.tol, args.max_excursion,
                       args.exterior_collections)
    if found is None:
        if args.out:
            write_json(args.out, "certificate", {"passed": False, "pair": None})
        print("no typical pair found", file=sys.stderr)
        return 2
    p, z, cert = found
    if args.out:
        write_json(args.out, "certificate", cert.to_dict())
    print(f"typical pair found: p = {p.coord(0)}^inf, certificate passes")
    return 0


def cmd_synthesize(args) -> int:
    A = load_cocycle(args.input)
    if A.dim == 1:
        cert = None
    else:
        found = _find_pair(A, args.tol, args.max_excursion,
                       args.exterior_collections)
        if found is None:
            print("no typical pair; cannot synthesize", file=sys.stderr)
            return 2
        cert = found[2]
    try:
        rep = synthesis.build_proximal_periodic(
            A, cert, args.word, args.tau, ell_cap=args.ell_cap
        )
    except (SynthesisFailed, TransversalityFailed) as exc:
        if args.out:
            write_json(args.out, "synthesis", {"failed": str(exc)})
        print(f"synthesis failed: {exc}", file=sys.stderr)
        return 2
    if args.out:
        write_json(args.out, "synthesis", rep.to_dict())
    print(
        f"q = {''.join(map(str, rep.q.symbols))} (period {rep.n_q}, offset {rep.j}, "
        f"bound {rep.bound_value:.6g})"
    )
    return 0


def cmd_verify_bound(args) -> int:
    A = load_cocycle(args.input)
    cert = None
    if A.dim > 1:
        found = _find_pair(A, args.tol, args.max_excursion,
                       args.exterior_collections)
        if found is None:
            print("no typical pair", file=sys.stderr)
            return 2
        cert = found[2]
    rng = np.random.default_rng(args.seed)
    lengths = rng.integers(args.n_min, args.n_max + 1, size=args.samples)
    words = [
        analysis.markov_sample(A, int(n), args.seed + 1000 + i)
        for i, n in enumerate(lengths)
    ]
    report = synthesis.verify_theorem_a(A, cert, words, args.tau, ell_cap=args.ell_cap)
    sample_rows = [(r.n, r.n_q, r.j, r.bound_value, r.ell_used)
                   for r in report.samples]
    if args.out:
        if args.format == "csv":
            write_csv(args.out, "theorem-a",
                      ["n", "n_q", "j", "bound_value", "ell_used"], sample_rows)
        else:
            write_json(args.out, "theorem-a", report.to_dict())
    if args.csv:
        write_csv(args.csv, "theorem-a",
                  ["n", "n_q", "j", "bound_value", "ell_used"], sample_rows)
    print(
        f"samples {len(report.samples)} ok, {len(report.failures)} failed; "
        f"empirical C = {report.empirical_c:.6g}, k = {report.empirical_k}, "
        f"slope = {report.slope:.3g}"
    )
    return 0


def cmd_dominate(args) -> int:
    A = load_cocycle(args.input)
    cert = None
    if A.dim > 1:
        found = _find_pair(A, args.tol, args.max_excursion,
                       args.exterior_collections)
        cert = found[2] if found else None
    n_list = list(range(args.n_min, args.n_max + 1))
    report = analysis.theorem_b_check(
        A, cert, args.index, args.max_period, n_list, workers=args.threads
    )
    if args.out:
        if args.format == "csv":
            write_csv(args.out, "gap-profile", ["n", "min_gap"],
                      report.profile.to_rows())
        else:
            write_json(args.out, "domination", report.to_dict())
    if args.csv:
        write_csv(args.csv, "gap-profile", ["n", "min_gap"],
                  report.profile.to_rows())
    print(
        f"periodic gap = {report.periodic_gap:.6g} (orbit {report.min_gap_orbit}), "
        f"slope = {report.profile.slope:.6g}, R2 = {report.profile.r_squared:.6g}, "
        f"verdict = {'dominated-evidence' if report.verdict else 'no-domination-evidence'}"
    )
    return 0 if report.verdict else 2


def cmd_spectrum(args) -> int:
    A = load_cocycle(args.input)
    rows = []
    for q, lam in analysis.periodic_spectrum(A, args.max_period):
        rows.append(
            (q.period, "".join(map(str, q.symbols)))
            + tuple(float(v) for v in lam)
        )
    header = ["period", "word"] + [f"lambda_{i+1}" for i in range(A.dim)]
    if args.out:
        write_csv(args.out, "spectrum", header, rows)
    print(f"{len(rows)} periodic orbits up to period {args.max_period}")
    return 0


def cmd_pressure(args) -> int:
    A = load_cocycle(args.input)
    n_list = list(range(args.n_min, args.n_max + 1))
    est = thermo.pressure(A, args.s, n_list, workers=args.threads)
    if args.out:
        if args.format == "csv":
            write_csv(args.out, "pressure", ["n", "p_n"],
                      list(zip(est.n_range, est.p_n)))
        else:
            write_json(args.out, "pressure", est.to_dict())
    if args.csv:
        write_csv(args.csv, "pressure", ["n", "p_n"],
                  list(zip(est.n_range, est.p_n)))
    oracle = "" if est.oracle is None else f" (oracle {est.oracle:.10g})"
    print(f"P(s={args.s}) ~ {est.value:.10g}{oracle}")
    return 0


def cmd_compare(args) -> int:
    A = load_cocycle(args.input)
    B = load_cocycle(args.input_b)
    found = _find_pair(A, args.tol, args.max_excursion,
                       args.exterior_collections)
    if found is None:
        print("no typical pair for the first cocycle", file=sys.stderr)
        return 2
    p, z, _ = found
    cert_pair = typicality.family_certificate([A, B], p, z, tol=args.tol)
    if not cert_pair.passed:
        print("pair certificate fails for the family", file=sys.stderr)
        return 2
    try:
        report = thermo.theorem_c_experiment(
            A, B, cert_pair, args.max_period, args.compare_tol,
            seed=args.seed, tau=args.tau, workers=args.threads,
        )
    except NotConstant as exc:
        if args.out:
            write_json(
                args.out,
                "equal-states",
                {"constant": False, "witness": list(exc.witness), "detail": str(exc)},
            )
        print(f"not constant: {exc}", file=sys.stderr)
        return 2
    if args.out:
        write_json(args.out, "equal-states", {"constant": True, **report.to_dict()})
    print(
        f"constant c = {report.constant_c:.10g}; pressure gap minus c = "
        f"{(report.pressure_a.value - report.pressure_b.value) - report.constant_c:.3g}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coprox",
        description="certified proximality and shadowing periodic orbits "
        "for matrix cocycles over subshifts of finite type",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    default_threads = int(os.environ.get("COPROX_THREADS", "1"))

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("--input", required=True, help="cocycle JSON file")
        p.add_argument("--out", help="report path")
        p.add_argument("--tol", type=float, default=1e-8, help="typicality tolerance")
        p.add_argument("--max-excursion", type=_positive_int, default=6)
        p.add_argument("--exterior-collections", choices=("all", "pairs"),
                       default="all",
                       help="twisting index collections on exterior powers "
                            "(dimensions >= 4 need 'pairs')")
        p.add_argument("--threads", type=_positive_int, default=default_threads,
                       help="worker processes (or set COPROX_THREADS)")

    p = sub.add_parser("demo", help="write a built-in example cocycle file")
    p.add_argument("name", choices=sorted(DEMOS))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("check", help="search for a typical pair and certify it")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("synthesize", help="build a proximal shadowing periodic orbit")
    common(p)
    p.add_argument("--word", type=_word, required=True)
    p.add_argument("--tau", type=float, default=0.05)
    p.add_argument("--ell-cap", type=_positive_int, default=2**14)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("verify-bound", help="singular/eigenvalue comparison experiment")
    common(p)
    p.add_argument("--format", choices=("json", "csv"), default="json",
                   help="what --out emits")
    p.add_argument("--samples", type=_positive_int, default=50)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n-min", type=_positive_int, default=4)
    p.add_argument("--n-max", type=_positive_int, default=40)
    p.add_argument("--tau", type=float, default=0.05)
    p.add_argument("--ell-cap", type=_positive_int, default=2**14)
    p.add_argument("--csv", help="per-sample CSV path")
    p.set_defaults(func=cmd_verify_bound)

    p = sub.add_parser("dominate", help="domination evidence from gaps")
    common(p)
    p.add_argument("--format", choices=("json", "csv"), default="json",
                   help="what --out emits")
    p.add_argument("--index", type=_positive_int, default=1)
    p.add_argument("--max-period", type=_positive_int, default=8)
    p.add_argument("--n-min", type=_positive_int, default=2)
    p.add_argument("--n-max", type=_positive_int, default=12)
    p.add_argument("--csv", help="gap profile CSV path")
    p.set_defaults(func=cmd_dominate)

    p = sub.add_parser("spectrum", help="periodic Lyapunov spectrum CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--out", help="CSV path")
    p.add_argument("--max-period", type=_positive_int, default=8)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("pressure", help="subadditive pressure estimate")
    common(p)
    p.add_argument("--format", choices=("json", "csv"), default="json",
                   help="what --out emits")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--n-min", type=_positive_int, default=4)
    p.add_argument("--n-max", type=_positive_int, default=12)
    p.add_argument("--csv", help="(n, P_n) CSV path")
    p.set_defaults(func=cmd_pressure)

    p = sub.add_parser("compare", help="equal-equilibrium-state experiment")
    common(p)
    p.add_argument("--input-b", required=True, help="second cocycle JSON file")
    p.add_argument("--max-period", type=_positive_int, default=6)
    p.add_argument("--compare-tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--tau", type=float, default=0.05)
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputFormatError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"file not found: {exc}", file=sys.stderr)
        return 1
    except CoproxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
