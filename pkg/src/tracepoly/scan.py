"""Positivity scans: evaluate Tr S(p,q) over whole degree triangles and
certify any negative value with independent engines before reporting it.

A negative cell is a finding, not a crash: scans complete and report,
and the caller (or the CLI exit code) decides what a violation means.
The one exception is a negative with min(p,q) <= 2, which is known
impossible and therefore treated as an engine bug.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from gmpy2 import mpq

from .engines import (
    ConsistencyError,
    s_table_recursive,
    s_words,
    real_trace,
    trace_coeff,
)
from .asymptotics import zero_product_check, TraceClassification
from .jsonio import canonical_json_bytes, short_hash
from .matrices import (
    DenseMatrix,
    HermitianMatrix,
    matrix_to_obj,
    random_psd,
    require_psd,
)
from .scalars import format_rational

# word-oracle certification is applied to negatives whenever the cell is
# this cheap; beyond it the toeplitz engine alone certifies
TRACTABLE_WORDS = 10**4

PRIMARY_ENGINE = "recursive"
CERTIFYING_ENGINE = "toeplitz"


def sign_symbol(value) -> str:
    if value > 0:
        return "+"
    if value < 0:
        return "-"
    return "0"


@dataclass(frozen=True)
class CellRecord:
    p: int
    q: int
    value: mpq

    @property
    def sign(self) -> str:
        return sign_symbol(self.value)


@dataclass(frozen=True)
class ScanReport:
    pair_descriptor: str
    max_total_degree: int
    engine: str
    certifier: str
    short_circuit: bool
    cells: tuple
    violations: tuple
    elapsed: float  # wall seconds; deliberately excluded from serialization


def pair_descriptor(a: DenseMatrix, b: DenseMatrix) -> str:
    """Content hash of the pair, stable across runs."""
    blob = canonical_json_bytes([matrix_to_obj(a), matrix_to_obj(b)])
    return f"sha256:{short_hash(blob)}"


def _certify_negative(a, b, p: int, q: int, value) -> None:
    """Re-derive a negative cell through independent engines; abort on
    any disagreement (a fake counterexample is the worst failure mode)."""
    if min(p, q) <= 2:
        raise ConsistencyError(
            f"Tr S({p},{q}) = {value} < 0 with min(p,q) <= 2; this regime is "
            "provably nonnegative, so an engine is broken"
        )
    check = trace_coeff(a, b, p, q, CERTIFYING_ENGINE)
    if check != value:
        raise ConsistencyError(
            f"engines disagree at ({p},{q}): {PRIMARY_ENGINE}={value}, "
            f"{CERTIFYING_ENGINE}={check}"
        )
    if math.comb(p + q, q) <= TRACTABLE_WORDS:
        oracle = real_trace(s_words(a, b, p, q))
        if oracle != value:
            raise ConsistencyError(
                f"word oracle disagrees at ({p},{q}): {PRIMARY_ENGINE}={value}, "
                f"words={oracle}"
            )


def scan_pair(a: HermitianMatrix, b: HermitianMatrix, max_total_degree: int,
              *, descriptor: str | None = None) -> ScanReport:
    """Exact trace table over all p+q <= max_total_degree for a PSD pair."""
    started = time.perf_counter()
    if max_total_degree < 0:
        raise ValueError("max_total_degree must be >= 0")
    require_psd(a, "A")
    require_psd(b, "B")
    if descriptor is None:
        descriptor = pair_descriptor(a, b)

    zero_report = zero_product_check(a, b, check_psd=False)
    short_circuit = zero_report.classification is TraceClassification.TRACE_ZERO

    cells = []
    if short_circuit:
        # Tr AB = 0 forces every mixed cell to vanish; only the pure
        # power borders need computing.
        pow_a = {0: mpq(a.n)}
        pow_b = {0: mpq(a.n)}
        cur = DenseMatrix.identity(a.n)
        for p in range(1, max_total_degree + 1):
            cur = cur @ a
            pow_a[p] = real_trace(cur)
        cur = DenseMatrix.identity(a.n)
        for q in range(1, max_total_degree + 1):
            cur = cur @ b
            pow_b[q] = real_trace(cur)
        for m in range(max_total_degree + 1):
            for q in range(m + 1):
                p = m - q
                if q == 0:
                    value = pow_a[p]
                elif p == 0:
                    value = pow_b[q]
                else:
                    value = mpq(0)
                cells.append(CellRecord(p, q, value))
    else:
        table = s_table_recursive(a, b, max_total_degree, max_total_degree)
        for m in range(max_total_degree + 1):
            for q in range(m + 1):
                p = m - q
                cells.append(CellRecord(p, q, table.trace(p, q)))

    violations = []
    for cell in cells:
        if cell.value < 0:
            _certify_negative(a, b, cell.p, cell.q, cell.value)
            violations.append(cell)

    certifier = CERTIFYING_ENGINE + "+words-when-tractable"
    return ScanReport(
        pair_descriptor=descriptor,
        max_total_degree=max_total_degree,
        engine=PRIMARY_ENGINE,
        certifier=certifier,
        short_circuit=short_circuit,
        cells=tuple(cells),
        violations=tuple(violations),
        elapsed=time.perf_counter() - started,
    )


@dataclass(frozen=True)
class AggregateScanReport:
    n: int
    samples: int
    max_total_degree: int
    seed: int
    magnitude: int
    reports: tuple

    @property
    def violations_total(self) -> int:
        return sum(len(r.violations) for r in self.reports)


def derived_seed(seed: int, index: int) -> int:
    """Per-sample seed: XOR of the run seed with the sample index."""
    return seed ^ index


def scan_random(n: int, samples: int, max_total_degree: int, seed: int,
                *, magnitude: int = 3, threads: int = 1) -> AggregateScanReport:
    """Scan `samples` seeded random PSD pairs; deterministic aggregate.

    Sample i uses derived seed s = seed XOR i; its pair is
    random_psd(n, 2s, magnitude) and random_psd(n, 2s+1, magnitude).
    Results are assembled in sample order regardless of thread timing.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if max_total_degree < 0:
        raise ValueError("max_total_degree must be >= 0")
    if magnitude < 1:
        raise ValueError("magnitude must be >= 1")
    if threads < 1:
        raise ValueError("threads must be >= 1")

    def run_one(i: int) -> ScanReport:
        s = derived_seed(seed, i)
        a = random_psd(n, 2 * s, magnitude)
        b = random_psd(n, 2 * s + 1, magnitude)
        return scan_pair(a, b, max_total_degree,
                         descriptor=f"sample-{i}-seed-{s}")

    if threads == 1:
        reports = [run_one(i) for i in range(samples)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(pool.map(run_one, range(samples)))

    return AggregateScanReport(
        n=n,
        samples=samples,
        max_total_degree=max_total_degree,
        seed=seed,
        magnitude=magnitude,
        reports=tuple(reports),
    )


# ---------------------------------------------------------------------------
# Serialization.  `elapsed` is intentionally left out: emitted reports must
# be byte-identical across runs with identical inputs.

def cell_to_obj(cell: CellRecord) -> dict:
    return {
        "p": cell.p,
        "q": cell.q,
        "value": format_rational(cell.value),
        "sign": cell.sign,
    }


def report_to_obj(report: ScanReport) -> dict:
    return {
        "pair": report.pair_descriptor,
        "max_total_degree": report.max_total_degree,
        "engine": report.engine,
        "certifier": report.certifier,
        "short_circuit": report.short_circuit,
        "cells": [cell_to_obj(c) for c in report.cells],
        "violations": [cell_to_obj(c) for c in report.violations],
    }


def aggregate_to_obj(agg: AggregateScanReport) -> dict:
    return {
        "n": agg.n,
        "samples": agg.samples,
        "max_total_degree": agg.max_total_degree,
        "seed": agg.seed,
        "magnitude": agg.magnitude,
        "violations_total": agg.violations_total,
        "reports": [report_to_obj(r) for r in agg.reports],
    }


CSV_HEADER = ("p", "q", "value", "sign", "engine")
AGGREGATE_CSV_HEADER = ("pair", "p", "q", "value", "sign", "engine")


def report_csv_rows(report: ScanReport):
    for c in report.cells:
        yield (c.p, c.q, format_rational(c.value), c.sign, report.engine)


def aggregate_csv_rows(agg: AggregateScanReport):
    for r in agg.reports:
        for c in r.cells:
            yield (r.pair_descriptor, c.p, c.q, format_rational(c.value),
                   c.sign, r.engine)
