"""Asymptotics of Tr S(m,k) for diagonal A: leading index, leading
block, the normalized limit, and the empirical inequality threshold.

For A = diag(a_1 >= ... >= a_n >= 0) and PSD B, Tr S(m,k) normalized
by a_p^m * C(m+k, k) converges to Tr C^k, where p is the first index
with a_p * b_pp > 0 and C is the principal block of B on the indices
tied with a_p.  Everything here is exact except the explicitly
float-labeled helpers at the bottom.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, InitVar
from typing import Optional

from gmpy2 import mpq

from .matrices import DenseMatrix, HermitianMatrix, require_psd
from .scalars import GaussianScalar, rational
from .engines import ConsistencyError, real_trace, s_table_recursive, stream_traces


class TraceClassification(enum.Enum):
    TRACE_POSITIVE = "positive"
    TRACE_ZERO = "zero"


@dataclass(frozen=True)
class ZeroProductReport:
    classification: TraceClassification
    trace_ab: mpq
    samples_checked: int


def zero_product_check(a: DenseMatrix, b: DenseMatrix, *, check_psd: bool = True,
                       sample_limit: int = 4) -> ZeroProductReport:
    """Classify a PSD pair by Tr AB, verifying the degeneracy it implies.

    Tr AB = 0 forces AB = 0 for PSD pairs, and then every Tr S(m,k)
    with m,k >= 1 vanishes.  Both consequences are re-verified exactly;
    a failure is an internal error and aborts loudly, because it would
    mean an engine produced impossible values.
    """
    if check_psd:
        require_psd(a, "A")
        require_psd(b, "B")
    product = a @ b
    t = real_trace(product)
    if t > 0:
        return ZeroProductReport(TraceClassification.TRACE_POSITIVE, t, 0)
    if t < 0:
        raise ConsistencyError(
            f"Tr AB = {t} < 0 for PSD inputs; this cannot happen"
        )
    if not product.is_zero():
        raise ConsistencyError(
            "Tr AB = 0 but AB != 0 for PSD inputs; aborting (engine fault)"
        )
    checked = 0
    table = s_table_recursive(a, b, sample_limit, sample_limit)
    for p in range(1, sample_limit + 1):
        for q in range(1, sample_limit + 1):
            value = table.trace(p, q)
            if value != 0:
                raise ConsistencyError(
                    f"AB = 0 but Tr S({p},{q}) = {value} != 0; aborting"
                )
            checked += 1
    return ZeroProductReport(TraceClassification.TRACE_ZERO, t, checked)


@dataclass(frozen=True)
class DiagonalPair:
    """A = diag(a) with a nonincreasing and nonnegative, plus PSD B."""

    a: tuple
    b: HermitianMatrix
    check_psd: InitVar[bool] = True

    def __post_init__(self, check_psd):
        values = tuple(rational(v) for v in self.a)
        object.__setattr__(self, "a", values)
        if not values:
            raise ValueError("diagonal must be nonempty")
        if len(values) != self.b.n:
            raise ValueError(
                f"diagonal length {len(values)} does not match B size {self.b.n}"
            )
        if any(v < 0 for v in values):
            raise ValueError("diagonal entries must be nonnegative")
        if any(x < y for x, y in zip(values, values[1:])):
            raise ValueError("diagonal must be nonincreasing")
        if check_psd:
            require_psd(self.b, "B")

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def matrix_a(self) -> HermitianMatrix:
        return HermitianMatrix.diagonal(self.a)

    @classmethod
    def from_matrices(cls, a: DenseMatrix, b: DenseMatrix, *, check_psd: bool = True) -> "DiagonalPair":
        """Build from matrix A, which must already be diagonal and sorted."""
        n = a.n
        for i in range(n):
            for j in range(n):
                if i != j and a.entry(i, j):
                    raise ValueError(
                        "A must be diagonal with a nonincreasing diagonal for the "
                        "exact path; use the float diagonalization helper for "
                        "general hermitian A"
                    )
        diag = []
        for i in range(n):
            e = a.entry(i, i)
            if e.im:
                raise ValueError("diagonal of A must be real")
            diag.append(e.re)
        return cls(tuple(diag), HermitianMatrix.wrap(b), check_psd=check_psd)


def trace_ab(pair: DiagonalPair) -> mpq:
    total = mpq(0)
    for i, ai in enumerate(pair.a):
        total += ai * pair.b.entry(i, i).re
    return total


def leading_index(pair: DiagonalPair) -> tuple:
    """(p, l): first 1-based index with a_p*b_pp > 0, and the length of
    the run of diagonal values equal to a_p starting at p."""
    if trace_ab(pair) == 0:
        raise ValueError(
            "Tr AB = 0: no leading index exists; run zero_product_check instead"
        )
    p = None
    for i, ai in enumerate(pair.a):
        if ai * pair.b.entry(i, i).re > 0:
            p = i + 1
            break
    if p is None:
        # trace_ab > 0 guarantees some positive a_i*b_ii term
        raise ConsistencyError("Tr AB > 0 but no index with a_i*b_ii > 0")
    value = pair.a[p - 1]
    l = 1
    for j in range(p, pair.n):
        if pair.a[j] == value:
            l += 1
        else:
            break
    return p, l


def leading_block(pair: DiagonalPair) -> HermitianMatrix:
    """Principal block of B on the indices tied with the leading one."""
    p, l = leading_index(pair)
    sub = pair.b.submatrix(range(p - 1, p - 1 + l))
    return HermitianMatrix.wrap(sub)


def asymptotic_limit(pair: DiagonalPair, k: int) -> mpq:
    """Exact limit of Tr S(m,k) / (a_p^m * C(m+k,k)) as m grows: Tr C^k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    block = leading_block(pair)
    return real_trace(block.power(k))


def ratio_sequence(pair: DiagonalPair, k: int, m_max: int) -> tuple:
    """Exact values of Tr S(m,k) / (a_p^m * C(m+k,k)) for m = 1..m_max."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    p, _ = leading_index(pair)
    ap = pair.a[p - 1]
    out = []
    for m, tr in stream_traces(pair.matrix_a, pair.b, k, m_max):
        if m == 0:
            continue
        out.append((m, tr / (ap**m * math.comb(m + k, k))))
    return tuple(out)


def estimate_N(pair: DiagonalPair, epsilon, k: int, m_max: int) -> Optional[int]:
    """Smallest m* with Tr S(m,k) >= (1-eps)*b_pp^k*a_p^m*C(m+k,k) for
    every m in [m*, m_max]; None if the bound fails at m_max itself.

    An empirical certificate over a finite horizon, not a proof beyond it.
    """
    eps = rational(epsilon)
    if not (0 < eps < 1):
        raise ValueError("epsilon must satisfy 0 < epsilon < 1")
    if k < 1:
        raise ValueError("k must be >= 1")
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    p, _ = leading_index(pair)
    ap = pair.a[p - 1]
    bpp = pair.b.entry(p - 1, p - 1).re
    scale = (1 - eps) * bpp**k
    last_failure = 0
    for m, tr in stream_traces(pair.matrix_a, pair.b, k, m_max):
        if m == 0:
            continue
        if tr < scale * ap**m * math.comb(m + k, k):
            last_failure = m
    if last_failure == m_max:
        return None
    return last_failure + 1 if last_failure else 1


@dataclass(frozen=True)
class AsymptoticReport:
    p: int
    l: int
    leading_block: HermitianMatrix
    limit_value: mpq
    ratio_sequence: tuple
    estimated_N: Optional[int]
    epsilon: mpq
    k: int


def asymptotic_report(pair: DiagonalPair, k: int, epsilon, m_max: int) -> AsymptoticReport:
    """Full report: leading data, exact limit, ratios, and threshold."""
    eps = rational(epsilon)
    p, l = leading_index(pair)
    block = leading_block(pair)
    limit = asymptotic_limit(pair, k)
    ratios = ratio_sequence(pair, k, m_max)
    n_est = estimate_N(pair, eps, k, m_max)
    return AsymptoticReport(p, l, block, limit, ratios, n_est, eps, k)


# ---------------------------------------------------------------------------
# Float-labeled diagnostics.  Nothing below feeds the exact code paths.

def to_float_array(m: DenseMatrix):
    import numpy as np

    return np.array(
        [[complex(e.re, e.im) for e in row] for row in m.rows()], dtype=complex
    )


def leading_eigenvalue_float(m: DenseMatrix) -> float:
    """Largest eigenvalue, floating point, for diagnostics only."""
    import numpy as np

    return float(np.linalg.eigvalsh(to_float_array(m)).max())


def diagonalize_float(a: DenseMatrix, b: DenseMatrix) -> tuple:
    """Diagonalize hermitian A in floating point and conjugate B to match.

    Returns (DiagonalPair, round_trip_error).  The pair's entries are
    exact rationals converted from floats, so downstream arithmetic is
    deterministic, but the pair only approximates the input; a warning
    carries the reconstruction error, and PSD validation is skipped
    (rounding may push tiny eigenvalues across zero).
    """
    import numpy as np

    if not a.is_hermitian() or not b.is_hermitian():
        raise ValueError("diagonalize_float expects hermitian inputs")
    fa = to_float_array(a)
    fb = to_float_array(b)
    eigvals, vecs = np.linalg.eigh(fa)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    vecs = vecs[:, order]
    round_trip = float(
        np.abs(vecs @ np.diag(eigvals) @ vecs.conj().T - fa).max()
    )
    conjugated = vecs.conj().T @ fb @ vecs
    sym = (conjugated + conjugated.conj().T) / 2
    warnings.warn(
        "floating-point diagonalization is approximate: round-trip error "
        f"{round_trip:.3e}; exact-arithmetic claims do not transfer",
        stacklevel=2,
    )
    diag = tuple(mpq(max(float(v), 0.0)) for v in eigvals)
    rows = [
        [
            # exact binary-float rationals; hermitian by the averaging above
            GaussianScalar(mpq(float(sym[i, j].real)), mpq(float(sym[i, j].imag)))
            for j in range(b.n)
        ]
        for i in range(b.n)
    ]
    pair = DiagonalPair(diag, HermitianMatrix(rows), check_psd=False)
    return pair, round_trip
