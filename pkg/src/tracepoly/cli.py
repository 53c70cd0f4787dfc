"""Command-line interface.

Exit codes are a contract: 0 means the run completed with no
violations, 2 means it completed and certified at least one violation,
1 means an operational error (bad input, guard tripped, inconsistency).
All emitted reports are byte-deterministic for identical inputs.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from .asymptotics import (
    DiagonalPair,
    TraceClassification,
    asymptotic_report,
    diagonalize_float,
    zero_product_check,
)
from .case3 import (
    CASE3_CSV_HEADER,
    Case3Params,
    case3_csv_rows,
    case3_report_to_obj,
    case3_scan,
    parse_grid,
)
from .engines import ENGINES, ConsistencyError, OracleTooLargeError, trace_coeff
from .jsonio import canonical_json_text, csv_text
from .matrices import (
    DenseMatrix,
    HermitianMatrix,
    MatrixFormatError,
    matrix_from_obj,
    matrix_to_obj,
)
from .scalars import approx_decimal, format_rational, parse_rational
from .scan import (
    AGGREGATE_CSV_HEADER,
    CSV_HEADER,
    aggregate_csv_rows,
    aggregate_to_obj,
    report_csv_rows,
    report_to_obj,
    scan_pair,
    scan_random,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATIONS = 2


class CLIError(Exception):
    """Operational error: message for stderr, exit code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; 2 is reserved for
    # certified violations here, so usage errors become CLIError -> 1
    def error(self, message):
        raise CLIError(f"{self.prog}: {message}")


def _load_json_file(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise CLIError(f"{path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise CLIError(f"{path}: invalid JSON: {exc}") from None


def _load_matrix(path: str) -> DenseMatrix:
    obj = _load_json_file(path)
    try:
        return matrix_from_obj(obj)
    except MatrixFormatError as exc:
        raise CLIError(f"{path}: {exc}") from None


def _load_hermitian(path: str, label: str) -> HermitianMatrix:
    m = _load_matrix(path)
    try:
        return HermitianMatrix.wrap(m)
    except ValueError as exc:
        raise CLIError(f"{path}: {label} {exc}") from None


def _emit(text: str, path: Optional[str]):
    if path is None:
        sys.stdout.write(text)
    else:
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise CLIError(f"{path}: {exc.strerror or exc}") from None


def _add_output_flags(sub):
    sub.add_argument("--format", choices=("json", "csv"), default="json",
                     help="report format (default json)")
    sub.add_argument("--output", metavar="PATH",
                     help="write the report to PATH instead of stdout")


def cmd_coeff(args) -> int:
    a = _load_hermitian(args.A, "matrix A:")
    b = _load_hermitian(args.B, "matrix B:")
    if args.p < 0 or args.q < 0:
        raise CLIError("--p and --q must be >= 0")
    try:
        value = trace_coeff(a, b, args.p, args.q, args.engine)
    except OracleTooLargeError as exc:
        raise CLIError(str(exc)) from None
    except ValueError as exc:
        raise CLIError(str(exc)) from None
    sys.stdout.write(f"{format_rational(value)} (approx {approx_decimal(value)})\n")
    return EXIT_OK


def cmd_table(args) -> int:
    a = _load_hermitian(args.A, "matrix A:")
    b = _load_hermitian(args.B, "matrix B:")
    if args.max_degree < 0:
        raise CLIError("--max-degree must be >= 0")
    try:
        report = scan_pair(a, b, args.max_degree)
    except ValueError as exc:
        raise CLIError(str(exc)) from None
    if args.format == "json":
        text = canonical_json_text(report_to_obj(report))
    else:
        text = csv_text(CSV_HEADER, report_csv_rows(report))
    _emit(text, args.output)
    if report.violations:
        for cell in report.violations:
            sys.stderr.write(
                f"violation: p={cell.p} q={cell.q} "
                f"value={format_rational(cell.value)}\n"
            )
        return EXIT_VIOLATIONS
    return EXIT_OK


def _epsilon_from_flag(text: str):
    try:
        eps = parse_rational(text)
    except ValueError as exc:
        raise CLIError(f"--epsilon: {exc}") from None
    if not (0 < eps < 1):
        raise CLIError("--epsilon must satisfy 0 < epsilon < 1")
    return eps


def cmd_asympt(args) -> int:
    a = _load_hermitian(args.A, "matrix A:")
    b = _load_hermitian(args.B, "matrix B:")
    if args.k < 1:
        raise CLIError("--k must be >= 1")
    if args.max_m < 1:
        raise CLIError("--max-m must be >= 1")
    eps = _epsilon_from_flag(args.epsilon)
    try:
        if args.float_diagonalize:
            pair, _round_trip = diagonalize_float(a, b)
        else:
            pair = DiagonalPair.from_matrices(a, b)
    except ValueError as exc:
        raise CLIError(str(exc)) from None

    check = zero_product_check(pair.matrix_a, pair.b,
                               check_psd=not args.float_diagonalize)
    if check.classification is TraceClassification.TRACE_ZERO:
        obj = {
            "classification": check.classification.value,
            "trace_ab": format_rational(check.trace_ab),
            "k": args.k,
            "epsilon": format_rational(eps),
            "ratio_sequence": [],
        }
        _emit(canonical_json_text(obj), args.output)
        return EXIT_OK

    report = asymptotic_report(pair, args.k, eps, args.max_m)
    obj = {
        "classification": check.classification.value,
        "p": report.p,
        "l": report.l,
        "leading_block": matrix_to_obj(report.leading_block),
        "limit_value": format_rational(report.limit_value),
        "limit_value_approx": approx_decimal(report.limit_value),
        "ratio_sequence": [
            [m, format_rational(r)] for m, r in report.ratio_sequence
        ],
        "estimated_N": report.estimated_N,
        "epsilon": format_rational(report.epsilon),
        "k": report.k,
    }
    _emit(canonical_json_text(obj), args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        aggregate = scan_random(
            args.n, args.samples, args.max_degree, args.seed,
            magnitude=args.magnitude, threads=args.threads,
        )
    except ValueError as exc:
        raise CLIError(str(exc)) from None
    if args.format == "json":
        text = canonical_json_text(aggregate_to_obj(aggregate))
    else:
        text = csv_text(AGGREGATE_CSV_HEADER, aggregate_csv_rows(aggregate))
    _emit(text, args.output)
    if aggregate.violations_total:
        for report in aggregate.reports:
            for cell in report.violations:
                sys.stderr.write(
                    f"violation: pair={report.pair_descriptor} p={cell.p} "
                    f"q={cell.q} value={format_rational(cell.value)}\n"
                )
        return EXIT_VIOLATIONS
    return EXIT_OK


def _parse_point(text: str) -> Case3Params:
    parts = text.split(",")
    if len(parts) != 6:
        raise CLIError(
            "--point needs six comma-separated rationals: x,y,u,v,w,a"
        )
    try:
        x, y, u, v, w, a = (parse_rational(p) for p in parts)
        return Case3Params.solve(x, y, u, v, w, a)
    except ValueError as exc:
        raise CLIError(str(exc)) from None


def cmd_case3(args) -> int:
    if args.point is not None:
        points = (_parse_point(args.point),)
        order = args.order
        if order is None:
            raise CLIError("--order is required with --point")
    else:
        obj = _load_json_file(args.grid)
        try:
            points, file_order = parse_grid(obj)
        except ValueError as exc:
            raise CLIError(f"{args.grid}: {exc}") from None
        order = args.order if args.order is not None else file_order
        if order is None:
            raise CLIError(
                "order not given: pass --order or put \"order\" in the grid file"
            )
    try:
        report = case3_scan(points, order, crosscheck=not args.no_crosscheck)
    except ValueError as exc:
        raise CLIError(str(exc)) from None
    if args.format == "json":
        text = canonical_json_text(case3_report_to_obj(report))
    else:
        text = csv_text(CASE3_CSV_HEADER, case3_csv_rows(report))
    _emit(text, args.output)
    if report.violations_total:
        for idx, result in enumerate(report.points):
            for m, value in result.violations:
                sys.stderr.write(
                    f"violation: point={idx} m={m} value={format_rational(value)}\n"
                )
        return EXIT_VIOLATIONS
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="tracepoly",
        description=(
            "Exact trace-coefficient toolkit: engines, positivity scans, "
            "asymptotics, and the singular 3x3 family."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_coeff = sub.add_parser("coeff", help="one exact Tr S(p,q) query")
    p_coeff.add_argument("--A", required=True, metavar="PATH", help="matrix JSON for A")
    p_coeff.add_argument("--B", required=True, metavar="PATH", help="matrix JSON for B")
    p_coeff.add_argument("--p", required=True, type=int)
    p_coeff.add_argument("--q", required=True, type=int)
    p_coeff.add_argument("--engine", choices=ENGINES, default="recursive")
    p_coeff.set_defaults(func=cmd_coeff)

    p_table = sub.add_parser("table", help="scan one PSD pair over p+q <= bound")
    p_table.add_argument("--A", required=True, metavar="PATH")
    p_table.add_argument("--B", required=True, metavar="PATH")
    p_table.add_argument("--max-degree", required=True, type=int, dest="max_degree")
    _add_output_flags(p_table)
    p_table.set_defaults(func=cmd_table)

    p_asympt = sub.add_parser("asympt", help="normalized-limit report for diagonal A")
    p_asympt.add_argument("--A", required=True, metavar="PATH")
    p_asympt.add_argument("--B", required=True, metavar="PATH")
    p_asympt.add_argument("--k", required=True, type=int)
    p_asympt.add_argument("--epsilon", required=True,
                          help="rational in (0,1), e.g. 1/10")
    p_asympt.add_argument("--max-m", required=True, type=int, dest="max_m")
    p_asympt.add_argument("--float-diagonalize", action="store_true",
                          dest="float_diagonalize",
                          help="diagonalize general hermitian A in floating "
                               "point (approximate; exact claims do not apply)")
    p_asympt.add_argument("--output", metavar="PATH")
    p_asympt.set_defaults(func=cmd_asympt)

    p_verify = sub.add_parser("verify", help="seeded random PSD pair scan")
    p_verify.add_argument("--n", required=True, type=int)
    p_verify.add_argument("--samples", required=True, type=int)
    p_verify.add_argument("--max-degree", required=True, type=int, dest="max_degree")
    p_verify.add_argument("--seed", required=True, type=int)
    p_verify.add_argument("--magnitude", type=int, default=3)
    p_verify.add_argument("--threads", type=int, default=1)
    _add_output_flags(p_verify)
    p_verify.set_defaults(func=cmd_verify)

    p_case3 = sub.add_parser("case3", help="singular 3x3 family series scan")
    src = p_case3.add_mutually_exclusive_group(required=True)
    src.add_argument("--grid", metavar="PATH", help="grid JSON file")
    src.add_argument("--point", metavar="X,Y,U,V,W,A",
                     help="single surface point; z is solved")
    p_case3.add_argument("--order", type=int, help="series truncation order")
    p_case3.add_argument("--no-crosscheck", action="store_true",
                         dest="no_crosscheck",
                         help="skip the per-coefficient engine cross-check")
    _add_output_flags(p_case3)
    p_case3.set_defaults(func=cmd_case3)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CLIError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR
    except ConsistencyError as exc:
        sys.stderr.write(f"internal consistency failure: {exc}\n")
        return EXIT_ERROR


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
