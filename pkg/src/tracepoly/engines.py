"""Coefficient engines.

S(p,q) denotes the coefficient matrix of t^q in (A+tB)^(p+q): the sum
of all ordered products of p copies of A and q copies of B.  Five
independent engines compute it; they must agree exactly, and the test
suite holds them to that.

Conventions: S(0,0) = I and S(p,q) = 0 whenever p < 0 or q < 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional

from gmpy2 import mpq

from .matrices import DenseMatrix

WORD_GUARD = 10**6

ENGINES = ("words", "recursive", "recursive_right", "toeplitz", "resolvent")


class OracleTooLargeError(ValueError):
    """Word enumeration was asked for more products than the guard allows."""


class ConsistencyError(RuntimeError):
    """Two routes that must agree exactly did not; never swallow this."""


def _check_pair(a: DenseMatrix, b: DenseMatrix):
    if not isinstance(a, DenseMatrix) or not isinstance(b, DenseMatrix):
        raise TypeError("expected DenseMatrix inputs")
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")


def real_trace(m: DenseMatrix) -> mpq:
    """Trace as an exact rational; non-real traces are treated as bugs.

    Every matrix this package takes a trace of is hermitian (or a sum
    of a matrix and its conjugate transpose), so a non-real trace means
    an engine fault upstream.
    """
    t = m.trace()
    if t.im:
        raise ConsistencyError("trace came out non-real; hermitian input expected")
    return t.re


@dataclass(frozen=True)
class CoeffTable:
    """All S(p,q) for 0 <= p <= max_p, 0 <= q <= max_q."""

    a: DenseMatrix
    b: DenseMatrix
    max_p: int
    max_q: int
    cells: tuple

    def cell(self, p: int, q: int) -> DenseMatrix:
        """S(p,q); negative indices give the zero matrix by convention."""
        if p < 0 or q < 0:
            return DenseMatrix.zero(self.a.n)
        if p > self.max_p or q > self.max_q:
            raise IndexError(
                f"cell ({p},{q}) outside stored bounds ({self.max_p},{self.max_q})"
            )
        return self.cells[p][q]

    def trace(self, p: int, q: int) -> mpq:
        return real_trace(self.cell(p, q))


@dataclass(frozen=True)
class BlockToeplitz:
    """Upper block-bidiagonal embedding: A on the diagonal, B above it."""

    k: int
    n: int
    body: DenseMatrix


@dataclass(frozen=True)
class MatrixSeries:
    """Truncated matrix power series; index j holds the t^j coefficient."""

    coefficients: tuple
    truncation_order: int

    def __post_init__(self):
        if self.truncation_order != len(self.coefficients) - 1:
            raise ValueError("truncation_order must equal len(coefficients) - 1")

    def coefficient(self, j: int) -> DenseMatrix:
        if j < 0:
            return DenseMatrix.zero(self.coefficients[0].n)
        if j > self.truncation_order:
            raise IndexError(
                f"coefficient {j} beyond truncation order {self.truncation_order}"
            )
        return self.coefficients[j]

    def __mul__(self, other: "MatrixSeries") -> "MatrixSeries":
        """Truncated convolution; valid through the smaller order."""
        order = min(self.truncation_order, other.truncation_order)
        out = []
        for j in range(order + 1):
            acc = None
            for r in range(j + 1):
                term = self.coefficients[r] @ other.coefficients[j - r]
                acc = term if acc is None else acc + term
            out.append(acc)
        return MatrixSeries(tuple(out), order)


def s_words(a: DenseMatrix, b: DenseMatrix, p: int, q: int, *, guard: int = WORD_GUARD) -> DenseMatrix:
    """Ground-truth oracle: literal sum over all C(p+q, q) ordered words.

    Shared prefixes are reused, so the work is one multiplication per
    distinct word prefix rather than p+q per word.
    """
    _check_pair(a, b)
    n = a.n
    if p < 0 or q < 0:
        return DenseMatrix.zero(n)
    count = math.comb(p + q, q)
    if count > guard:
        raise OracleTooLargeError(
            f"oracle too large: C({p + q},{q}) = {count} words exceeds guard {guard}"
        )
    total = DenseMatrix.zero(n)

    def walk(prefix: DenseMatrix, rem_a: int, rem_b: int):
        nonlocal total
        if rem_a == 0 and rem_b == 0:
            total = total + prefix
            return
        if rem_a:
            walk(prefix @ a, rem_a - 1, rem_b)
        if rem_b:
            walk(prefix @ b, rem_a, rem_b - 1)

    walk(DenseMatrix.identity(n), p, q)
    return total


def words_table(a: DenseMatrix, b: DenseMatrix, max_total_degree: int, *, guard: int = WORD_GUARD) -> dict:
    """Word-enumeration sums for every cell with p+q <= max_total_degree.

    One depth-first walk over the binary word tree accumulates each
    prefix into its (p,q) cell, so the whole triangle costs about
    2^(max_total_degree+1) multiplications.  Returns {(p, q): matrix}.
    """
    _check_pair(a, b)
    if max_total_degree < 0:
        raise ValueError("max_total_degree must be >= 0")
    nodes = 2 ** (max_total_degree + 1) - 1
    if nodes > guard:
        raise OracleTooLargeError(
            f"oracle too large: {nodes} word prefixes exceed guard {guard}"
        )
    n = a.n
    table = {
        (p, q): DenseMatrix.zero(n)
        for p in range(max_total_degree + 1)
        for q in range(max_total_degree + 1 - p)
    }

    def walk(prefix: DenseMatrix, p: int, q: int):
        table[(p, q)] = table[(p, q)] + prefix
        if p + q == max_total_degree:
            return
        walk(prefix @ a, p + 1, q)
        walk(prefix @ b, p, q + 1)

    walk(DenseMatrix.identity(n), 0, 0)
    return table


def s_table_recursive(a: DenseMatrix, b: DenseMatrix, max_p: int, max_q: int) -> CoeffTable:
    """Dynamic programming with the left recursion
    S(p,q) = A*S(p-1,q) + B*S(p,q-1)."""
    _check_pair(a, b)
    if max_p < 0 or max_q < 0:
        raise ValueError("table bounds must be >= 0")
    n = a.n
    cells = [[None] * (max_q + 1) for _ in range(max_p + 1)]
    cells[0][0] = DenseMatrix.identity(n)
    for p in range(1, max_p + 1):
        cells[p][0] = a @ cells[p - 1][0]
    for q in range(1, max_q + 1):
        cells[0][q] = b @ cells[0][q - 1]
    for p in range(1, max_p + 1):
        for q in range(1, max_q + 1):
            cells[p][q] = (a @ cells[p - 1][q]) + (b @ cells[p][q - 1])
    return CoeffTable(a, b, max_p, max_q, tuple(map(tuple, cells)))


def s_table_recursive_right(a: DenseMatrix, b: DenseMatrix, max_p: int, max_q: int) -> CoeffTable:
    """Dynamic programming with the right recursion
    S(p,q) = S(p-1,q)*A + S(p,q-1)*B."""
    _check_pair(a, b)
    if max_p < 0 or max_q < 0:
        raise ValueError("table bounds must be >= 0")
    n = a.n
    cells = [[None] * (max_q + 1) for _ in range(max_p + 1)]
    cells[0][0] = DenseMatrix.identity(n)
    for p in range(1, max_p + 1):
        cells[p][0] = cells[p - 1][0] @ a
    for q in range(1, max_q + 1):
        cells[0][q] = cells[0][q - 1] @ b
    for p in range(1, max_p + 1):
        for q in range(1, max_q + 1):
            cells[p][q] = (cells[p - 1][q] @ a) + (cells[p][q - 1] @ b)
    return CoeffTable(a, b, max_p, max_q, tuple(map(tuple, cells)))


def build_toeplitz(a: DenseMatrix, b: DenseMatrix, k: int) -> BlockToeplitz:
    """k-by-k block matrix with A on the diagonal and B just above it."""
    _check_pair(a, b)
    if k < 1:
        raise ValueError("k must be >= 1")
    n = a.n
    grid = [
        [a if i == j else (b if j == i + 1 else None) for j in range(k)]
        for i in range(k)
    ]
    return BlockToeplitz(k, n, DenseMatrix.from_blocks(grid, n))


def s_from_toeplitz(a: DenseMatrix, b: DenseMatrix, m: int, k: int) -> DenseMatrix:
    """S(m-k+1, k-1) as the top-right block of the embedding's m-th power.

    The power is taken by repeated squaring, so the cost is O(log m)
    multiplications of kn-by-kn matrices.
    """
    _check_pair(a, b)
    if k < 1:
        raise ValueError("k must be >= 1")
    if m < 0:
        raise ValueError("m must be >= 0")
    n = a.n
    if m < k - 1:
        return DenseMatrix.zero(n)
    body = build_toeplitz(a, b, k).body
    return body.power(m).block(0, k - 1, n)


def resolvent_series(a: DenseMatrix, b: DenseMatrix, k: int, order: int) -> MatrixSeries:
    """Truncated series of (I-tA)^(-1) * (B(I-tA)^(-1))^(k-1).

    The t^j coefficient equals S(j, k-1).  Built from the Neumann
    coefficients A^j by repeated truncated convolution.
    """
    _check_pair(a, b)
    if k < 1:
        raise ValueError("k must be >= 1")
    if order < 0:
        raise ValueError("order must be >= 0")
    n = a.n
    neumann = [DenseMatrix.identity(n)]
    for _ in range(order):
        neumann.append(a @ neumann[-1])
    result = MatrixSeries(tuple(neumann), order)
    if k == 1:
        return result
    b_resolvent = MatrixSeries(tuple(b @ c for c in neumann), order)
    for _ in range(k - 1):
        result = result * b_resolvent
    return result


def stream_traces(a: DenseMatrix, b: DenseMatrix, k: int, m_max: int) -> Iterator[tuple]:
    """Yield (m, Tr S(m,k)) for m = 0..m_max keeping only k+1 matrices.

    Row m is advanced in place from row m-1 via the left recursion, so
    memory stays O(k) matrices however large m_max gets.
    """
    _check_pair(a, b)
    if k < 0:
        raise ValueError("k must be >= 0")
    if m_max < 0:
        raise ValueError("m_max must be >= 0")
    row = [None] * (k + 1)
    row[0] = DenseMatrix.identity(a.n)
    for q in range(1, k + 1):
        row[q] = b @ row[q - 1]
    yield 0, real_trace(row[k])
    for m in range(1, m_max + 1):
        nxt = [a @ row[0]]
        for q in range(1, k + 1):
            nxt.append((a @ row[q]) + (b @ nxt[q - 1]))
        row = nxt
        yield m, real_trace(row[k])


def s_matrix(a: DenseMatrix, b: DenseMatrix, p: int, q: int, engine: str = "recursive") -> DenseMatrix:
    """S(p,q) via the selected engine; all engines agree exactly."""
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; choose from {ENGINES}")
    if p < 0 or q < 0:
        _check_pair(a, b)
        return DenseMatrix.zero(a.n)
    if engine == "words":
        return s_words(a, b, p, q)
    if engine == "recursive":
        return s_table_recursive(a, b, p, q).cell(p, q)
    if engine == "recursive_right":
        return s_table_recursive_right(a, b, p, q).cell(p, q)
    if engine == "toeplitz":
        return s_from_toeplitz(a, b, p + q, q + 1)
    return resolvent_series(a, b, q + 1, p).coefficient(p)


def trace_coeff(a: DenseMatrix, b: DenseMatrix, p: int, q: int, engine: str = "recursive") -> mpq:
    """Tr S(p,q) as an exact rational via the selected engine."""
    return real_trace(s_matrix(a, b, p, q, engine))
