"""Exact dense matrices over Gaussian rationals.

Internally a matrix is a pair of immutable rational planes (real and
imaginary parts), which keeps the hot multiplication loops free of
object-per-entry overhead.  All arithmetic is exact; nothing here ever
touches floats.
"""
from __future__ import annotations

import random
from typing import Iterable, Optional, Sequence

from gmpy2 import mpq

from .scalars import ZERO, ONE, GaussianScalar, gaussian, format_rational


class MatrixFormatError(ValueError):
    """Raised when serialized matrix data is malformed."""


def _zero_plane(n):
    row = (ZERO,) * n
    return (row,) * n


def _plane_is_zero(plane) -> bool:
    return not any(any(row) for row in plane)


def _rmatmul(a, b, n):
    # i-k-j order with zero skip; rows of b are reused as a whole,
    # which keeps the inner loop a single list comprehension.
    out = []
    for i in range(n):
        acc = [ZERO] * n
        arow = a[i]
        for k in range(n):
            x = arow[k]
            if x:
                acc = [s + x * u for s, u in zip(acc, b[k])]
        out.append(tuple(acc))
    return tuple(out)


def _cmatmul(ar, ai, br, bi, n):
    cre = []
    cim = []
    for i in range(n):
        accr = [ZERO] * n
        acci = [ZERO] * n
        arow = ar[i]
        irow = ai[i]
        for k in range(n):
            x = arow[k]
            y = irow[k]
            if x or y:
                brk = br[k]
                bik = bi[k]
                accr = [s + x * u - y * v for s, u, v in zip(accr, brk, bik)]
                acci = [s + x * v + y * u for s, u, v in zip(acci, brk, bik)]
        cre.append(tuple(accr))
        cim.append(tuple(acci))
    return tuple(cre), tuple(cim)


class DenseMatrix:
    """Immutable square matrix of GaussianScalar entries."""

    __slots__ = ("n", "_re", "_im", "_real_only")

    def __init__(self, rows: Sequence[Sequence]):
        rows = list(rows)
        n = len(rows)
        if n == 0:
            raise ValueError("matrix must have at least one row")
        re_plane = []
        im_plane = []
        for i, row in enumerate(rows):
            row = list(row)
            if len(row) != n:
                raise ValueError(f"row {i} has {len(row)} entries, expected {n}")
            entries = [gaussian(v) for v in row]
            re_plane.append(tuple(e.re for e in entries))
            im_plane.append(tuple(e.im for e in entries))
        self._init_planes(n, tuple(re_plane), tuple(im_plane))

    def _init_planes(self, n, re, im):
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "_re", re)
        object.__setattr__(self, "_im", im)
        object.__setattr__(self, "_real_only", _plane_is_zero(im))

    def __setattr__(self, name, value):
        raise AttributeError("DenseMatrix is immutable")

    @classmethod
    def _from_planes(cls, n, re, im) -> "DenseMatrix":
        obj = object.__new__(cls)
        obj._init_planes(n, re, im)
        return obj

    @classmethod
    def zero(cls, n: int) -> "DenseMatrix":
        return cls._from_planes(n, _zero_plane(n), _zero_plane(n))

    @classmethod
    def identity(cls, n: int) -> "DenseMatrix":
        re = tuple(
            tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)
        )
        return cls._from_planes(n, re, _zero_plane(n))

    @classmethod
    def diagonal(cls, values: Iterable) -> "DenseMatrix":
        vals = [gaussian(v) for v in values]
        n = len(vals)
        if n == 0:
            raise ValueError("diagonal needs at least one value")
        re = tuple(
            tuple(vals[i].re if i == j else ZERO for j in range(n)) for i in range(n)
        )
        im = tuple(
            tuple(vals[i].im if i == j else ZERO for j in range(n)) for i in range(n)
        )
        return cls._from_planes(n, re, im)

    @classmethod
    def from_blocks(cls, grid: Sequence[Sequence[Optional["DenseMatrix"]]], block_n: int) -> "DenseMatrix":
        """Assemble a square matrix from a k-by-k grid of n-by-n blocks.

        None stands for the zero block.
        """
        k = len(grid)
        size = k * block_n
        re = [[ZERO] * size for _ in range(size)]
        im = [[ZERO] * size for _ in range(size)]
        for bi, brow in enumerate(grid):
            if len(brow) != k:
                raise ValueError("block grid must be square")
            for bj, blk in enumerate(brow):
                if blk is None:
                    continue
                if blk.n != block_n:
                    raise ValueError(
                        f"block ({bi},{bj}) has size {blk.n}, expected {block_n}"
                    )
                for i in range(block_n):
                    re[bi * block_n + i][bj * block_n:(bj + 1) * block_n] = blk._re[i]
                    im[bi * block_n + i][bj * block_n:(bj + 1) * block_n] = blk._im[i]
        return cls._from_planes(
            size, tuple(map(tuple, re)), tuple(map(tuple, im))
        )

    def block(self, bi: int, bj: int, block_n: int) -> "DenseMatrix":
        """Extract the (bi,bj) block (0-based) of size block_n."""
        r0, c0 = bi * block_n, bj * block_n
        if r0 + block_n > self.n or c0 + block_n > self.n:
            raise ValueError("block indices out of range")
        re = tuple(self._re[r0 + i][c0:c0 + block_n] for i in range(block_n))
        im = tuple(self._im[r0 + i][c0:c0 + block_n] for i in range(block_n))
        return DenseMatrix._from_planes(block_n, re, im)

    def entry(self, i: int, j: int) -> GaussianScalar:
        return GaussianScalar(self._re[i][j], self._im[i][j])

    def rows(self):
        return tuple(
            tuple(GaussianScalar(x, y) for x, y in zip(rr, ri))
            for rr, ri in zip(self._re, self._im)
        )

    @property
    def is_real(self) -> bool:
        return self._real_only

    def is_zero(self) -> bool:
        return _plane_is_zero(self._re) and self._real_only

    def trace(self) -> GaussianScalar:
        re = sum((self._re[i][i] for i in range(self.n)), ZERO)
        im = sum((self._im[i][i] for i in range(self.n)), ZERO)
        return GaussianScalar(re, im)

    def conj_transpose(self) -> "DenseMatrix":
        n = self.n
        re = tuple(tuple(self._re[j][i] for j in range(n)) for i in range(n))
        im = tuple(tuple(-self._im[j][i] for j in range(n)) for i in range(n))
        return DenseMatrix._from_planes(n, re, im)

    def transpose(self) -> "DenseMatrix":
        n = self.n
        re = tuple(tuple(self._re[j][i] for j in range(n)) for i in range(n))
        im = tuple(tuple(self._im[j][i] for j in range(n)) for i in range(n))
        return DenseMatrix._from_planes(n, re, im)

    def is_hermitian(self) -> bool:
        n = self.n
        for i in range(n):
            if self._im[i][i]:
                return False
            for j in range(i + 1, n):
                if self._re[i][j] != self._re[j][i] or self._im[i][j] != -self._im[j][i]:
                    return False
        return True

    def _require_same_shape(self, other):
        if not isinstance(other, DenseMatrix):
            raise TypeError("expected a DenseMatrix")
        if other.n != self.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")

    def __add__(self, other) -> "DenseMatrix":
        self._require_same_shape(other)
        n = self.n
        re = tuple(
            tuple(x + y for x, y in zip(self._re[i], other._re[i])) for i in range(n)
        )
        im = tuple(
            tuple(x + y for x, y in zip(self._im[i], other._im[i])) for i in range(n)
        )
        return DenseMatrix._from_planes(n, re, im)

    def __sub__(self, other) -> "DenseMatrix":
        self._require_same_shape(other)
        n = self.n
        re = tuple(
            tuple(x - y for x, y in zip(self._re[i], other._re[i])) for i in range(n)
        )
        im = tuple(
            tuple(x - y for x, y in zip(self._im[i], other._im[i])) for i in range(n)
        )
        return DenseMatrix._from_planes(n, re, im)

    def __neg__(self) -> "DenseMatrix":
        n = self.n
        re = tuple(tuple(-x for x in row) for row in self._re)
        im = tuple(tuple(-x for x in row) for row in self._im)
        return DenseMatrix._from_planes(n, re, im)

    def scale(self, scalar) -> "DenseMatrix":
        s = gaussian(scalar)
        n = self.n
        if not s.im:
            c = s.re
            re = tuple(tuple(c * x for x in row) for row in self._re)
            im = tuple(tuple(c * x for x in row) for row in self._im)
        else:
            a, b = s.re, s.im
            re = tuple(
                tuple(a * x - b * y for x, y in zip(rr, ri))
                for rr, ri in zip(self._re, self._im)
            )
            im = tuple(
                tuple(a * y + b * x for x, y in zip(rr, ri))
                for rr, ri in zip(self._re, self._im)
            )
        return DenseMatrix._from_planes(n, re, im)

    def __matmul__(self, other) -> "DenseMatrix":
        self._require_same_shape(other)
        n = self.n
        if self._real_only and other._real_only:
            re = _rmatmul(self._re, other._re, n)
            return DenseMatrix._from_planes(n, re, _zero_plane(n))
        if self._real_only:
            re = _rmatmul(self._re, other._re, n)
            im = _rmatmul(self._re, other._im, n)
            return DenseMatrix._from_planes(n, re, im)
        if other._real_only:
            re = _rmatmul(self._re, other._re, n)
            im = _rmatmul(self._im, other._re, n)
            return DenseMatrix._from_planes(n, re, im)
        re, im = _cmatmul(self._re, self._im, other._re, other._im, n)
        return DenseMatrix._from_planes(n, re, im)

    def power(self, m: int) -> "DenseMatrix":
        if not isinstance(m, int) or m < 0:
            raise ValueError("matrix power needs a nonnegative int exponent")
        result = None
        base = self
        e = m
        while e:
            if e & 1:
                result = base if result is None else result @ base
            e >>= 1
            if e:
                base = base @ base
        return DenseMatrix.identity(self.n) if result is None else result

    def submatrix(self, indices: Sequence[int]) -> "DenseMatrix":
        """Principal submatrix on the given (0-based, strictly increasing) rows."""
        idx = tuple(indices)
        if not idx:
            raise ValueError("submatrix needs at least one index")
        if any(i < 0 or i >= self.n for i in idx):
            raise ValueError("submatrix index out of range")
        if any(a >= b for a, b in zip(idx, idx[1:])):
            raise ValueError("submatrix indices must be strictly increasing")
        re = tuple(tuple(self._re[i][j] for j in idx) for i in idx)
        im = tuple(tuple(self._im[i][j] for j in idx) for i in idx)
        return DenseMatrix._from_planes(len(idx), re, im)

    def determinant(self) -> GaussianScalar:
        """Exact determinant by Gaussian elimination with pivoting."""
        n = self.n
        rows = [
            [GaussianScalar(x, y) for x, y in zip(rr, ri)]
            for rr, ri in zip(self._re, self._im)
        ]
        det = GaussianScalar(1, 0)
        for col in range(n):
            pivot_row = None
            for r in range(col, n):
                if rows[r][col]:
                    pivot_row = r
                    break
            if pivot_row is None:
                return GaussianScalar(0, 0)
            if pivot_row != col:
                rows[col], rows[pivot_row] = rows[pivot_row], rows[col]
                det = -det
            pivot = rows[col][col]
            det = det * pivot
            for r in range(col + 1, n):
                factor = rows[r][col] / pivot
                if factor:
                    rows[r] = [
                        a - factor * b for a, b in zip(rows[r], rows[col])
                    ]
        return det

    def inverse(self) -> "DenseMatrix":
        """Exact inverse by Gauss-Jordan elimination."""
        n = self.n
        aug = [
            [GaussianScalar(x, y) for x, y in zip(rr, ri)]
            + [GaussianScalar(1, 0) if i == j else GaussianScalar(0, 0) for j in range(n)]
            for i, (rr, ri) in enumerate(zip(self._re, self._im))
        ]
        for col in range(n):
            pivot_row = None
            for r in range(col, n):
                if aug[r][col]:
                    pivot_row = r
                    break
            if pivot_row is None:
                raise ZeroDivisionError("matrix is singular")
            aug[col], aug[pivot_row] = aug[pivot_row], aug[col]
            pivot = aug[col][col]
            aug[col] = [v / pivot for v in aug[col]]
            for r in range(n):
                if r != col and aug[r][col]:
                    factor = aug[r][col]
                    aug[r] = [a - factor * b for a, b in zip(aug[r], aug[col])]
        return DenseMatrix([row[n:] for row in aug])

    def __eq__(self, other) -> bool:
        if not isinstance(other, DenseMatrix):
            return NotImplemented
        return self.n == other.n and self._re == other._re and self._im == other._im

    def __hash__(self):
        return hash((self.n, self._re, self._im))

    def __repr__(self) -> str:
        rows = "; ".join(
            ", ".join(str(GaussianScalar(x, y)) for x, y in zip(rr, ri))
            for rr, ri in zip(self._re, self._im)
        )
        return f"DenseMatrix({self.n}x{self.n}: [{rows}])"


class HermitianMatrix(DenseMatrix):
    """DenseMatrix validated hermitian on construction."""

    __slots__ = ()

    def __init__(self, rows):
        super().__init__(rows)
        self._validate()

    def _validate(self):
        n = self.n
        for i in range(n):
            if self._im[i][i]:
                raise ValueError(
                    f"matrix is not hermitian: diagonal entry ({i},{i}) is not real"
                )
            for j in range(i + 1, n):
                if (
                    self._re[i][j] != self._re[j][i]
                    or self._im[i][j] != -self._im[j][i]
                ):
                    raise ValueError(
                        f"matrix is not hermitian: entries ({i},{j}) and ({j},{i}) "
                        "are not conjugate"
                    )

    @classmethod
    def wrap(cls, m: DenseMatrix) -> "HermitianMatrix":
        obj = object.__new__(cls)
        obj._init_planes(m.n, m._re, m._im)
        obj._validate()
        return obj

    @classmethod
    def diagonal(cls, values) -> "HermitianMatrix":
        return cls.wrap(DenseMatrix.diagonal(values))

    @classmethod
    def identity(cls, n: int) -> "HermitianMatrix":
        return cls.wrap(DenseMatrix.identity(n))

    @classmethod
    def zero(cls, n: int) -> "HermitianMatrix":
        return cls.wrap(DenseMatrix.zero(n))


def conj_transpose(m: DenseMatrix) -> DenseMatrix:
    return m.conj_transpose()


def is_hermitian(m: DenseMatrix) -> bool:
    return m.is_hermitian()


def _principal_subsets(n: int):
    # all nonempty index subsets, ordered by size then lexicographically;
    # the order is part of the determinism contract for error messages
    from itertools import combinations

    for size in range(1, n + 1):
        yield from combinations(range(n), size)


def principal_minor(m: DenseMatrix, indices: Sequence[int]):
    """Exact determinant of the principal submatrix on `indices`.

    The input must be hermitian, so the result is a real rational.
    """
    if not m.is_hermitian():
        raise ValueError("principal_minor requires a hermitian matrix")
    det = m.submatrix(indices).determinant()
    if det.im:
        raise AssertionError("hermitian principal minor came out non-real")
    return det.re


def failing_minor(m: DenseMatrix):
    """First negative principal minor (subset, value), or None if PSD.

    Subsets are scanned by size then lexicographic order.
    """
    if not m.is_hermitian():
        raise ValueError("is_psd requires a hermitian matrix")
    for subset in _principal_subsets(m.n):
        value = principal_minor(m, subset)
        if value < 0:
            return subset, value
    return None


def is_psd(m: DenseMatrix) -> bool:
    """Exact positive-semidefiniteness via all principal minors."""
    return failing_minor(m) is None


def require_psd(m: DenseMatrix, label: str):
    """Raise ValueError naming the first failing principal minor."""
    if not m.is_hermitian():
        raise ValueError(f"{label} must be hermitian")
    found = failing_minor(m)
    if found is not None:
        subset, value = found
        raise ValueError(
            f"{label} is not PSD: principal minor {list(subset)} = {value}"
        )


def random_gaussian_matrix(n: int, seed: int, magnitude: int = 3) -> DenseMatrix:
    """Deterministic random matrix with Gaussian-rational entries.

    Draw order is fixed: entries row-major, per entry the four draws
    re_num, re_den, im_num, im_den with numerators uniform on
    [-magnitude, magnitude] and denominators uniform on [1, magnitude].
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if magnitude < 1:
        raise ValueError("magnitude must be >= 1")
    rng = random.Random(seed)
    rows = []
    for _ in range(n):
        row = []
        for _ in range(n):
            re_num = rng.randint(-magnitude, magnitude)
            re_den = rng.randint(1, magnitude)
            im_num = rng.randint(-magnitude, magnitude)
            im_den = rng.randint(1, magnitude)
            row.append(GaussianScalar(mpq(re_num, re_den), mpq(im_num, im_den)))
        rows.append(row)
    return DenseMatrix(rows)


def random_psd(n: int, seed: int, magnitude: int = 3) -> HermitianMatrix:
    """Seeded PSD matrix: G times conj_transpose(G) for a random G."""
    g = random_gaussian_matrix(n, seed, magnitude)
    return HermitianMatrix.wrap(g @ g.conj_transpose())


def _entry_to_obj(e: GaussianScalar):
    if not e.im:
        return format_rational(e.re)
    return [format_rational(e.re), format_rational(e.im)]


def matrix_to_obj(m: DenseMatrix) -> dict:
    """JSON-ready object: {"n": n, "entries": n x n array}.

    Real entries serialize as "num/den" strings, complex entries as
    ["re", "im"] pairs of such strings.
    """
    return {
        "n": m.n,
        "entries": [
            [_entry_to_obj(GaussianScalar(x, y)) for x, y in zip(rr, ri)]
            for rr, ri in zip(m._re, m._im)
        ],
    }


def _entry_from_obj(value, i: int, j: int) -> GaussianScalar:
    from .scalars import parse_rational

    where = f"entry ({i},{j})"
    if isinstance(value, str):
        try:
            return GaussianScalar(parse_rational(value), ZERO)
        except ValueError as exc:
            raise MatrixFormatError(f"{where}: {exc}") from None
    if isinstance(value, list):
        if len(value) != 2 or not all(isinstance(p, str) for p in value):
            raise MatrixFormatError(
                f"{where}: complex entry must be a two-element array of strings"
            )
        try:
            return GaussianScalar(parse_rational(value[0]), parse_rational(value[1]))
        except ValueError as exc:
            raise MatrixFormatError(f"{where}: {exc}") from None
    raise MatrixFormatError(
        f"{where}: expected a rational string or a two-element array"
    )


def matrix_from_obj(obj) -> DenseMatrix:
    """Parse the matrix JSON object format; errors name the position."""
    if not isinstance(obj, dict):
        raise MatrixFormatError("matrix JSON must be an object")
    if "n" not in obj or "entries" not in obj:
        raise MatrixFormatError('matrix JSON must have fields "n" and "entries"')
    n = obj["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise MatrixFormatError('"n" must be a positive integer')
    entries = obj["entries"]
    if not isinstance(entries, list) or len(entries) != n:
        raise MatrixFormatError(f'"entries" must be an array of {n} rows')
    rows = []
    for i, row in enumerate(entries):
        if not isinstance(row, list) or len(row) != n:
            got = len(row) if isinstance(row, list) else type(row).__name__
            raise MatrixFormatError(f"row {i}: expected {n} entries, got {got}")
        rows.append([_entry_from_obj(v, i, j) for j, v in enumerate(row)])
    return DenseMatrix(rows)
