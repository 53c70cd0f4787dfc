"""The 3x3 singular family with degree-3 trace series.

A = diag(1, a, 0) with a in [0,1], and B real symmetric with positive
off-diagonal magnitudes u, v, w entering with negative sign:

    B = [[ x, -u, -v],
         [-u,  y, -w],
         [-v, -w,  z]]

restricted to the det B = 0 surface 2uvw = xyz - u^2*z - v^2*y - w^2*x.
The degree-3 trace series Tr (I-tA)^(-1) (B(I-tA)^(-1))^3 then has a
closed form as a sum of simple pole terms in (1-t) and (1-at), which
this module evaluates and cross-checks against the generic engines.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

from gmpy2 import mpq

from .engines import ConsistencyError, real_trace, resolvent_series
from .matrices import HermitianMatrix
from .scalars import format_rational, parse_rational, rational
from .scan import sign_symbol


@dataclass(frozen=True)
class Case3Params:
    """One point of the family; construction validates every constraint
    and names the violated one on failure."""

    x: mpq
    y: mpq
    z: mpq
    u: mpq
    v: mpq
    w: mpq
    a: mpq

    def __post_init__(self):
        for name in ("x", "y", "z", "u", "v", "w", "a"):
            object.__setattr__(self, name, rational(getattr(self, name)))
        x, y, z, u, v, w, a = self.x, self.y, self.z, self.u, self.v, self.w, self.a
        if u <= 0 or v <= 0 or w <= 0:
            raise ValueError(f"u,v,w>0 required (got u={u}, v={v}, w={w})")
        if not (0 <= a <= 1):
            raise ValueError(f"a must lie in [0,1] (got a={a})")
        for name, val in (("x", x), ("y", y), ("z", z)):
            if val < 0:
                raise ValueError(f"{name} must be nonnegative (got {name}={val})")
        if u * u > x * y:
            raise ValueError(f"minor constraint u^2 <= x*y violated (u^2={u*u}, x*y={x*y})")
        if v * v > x * z:
            raise ValueError(f"minor constraint v^2 <= x*z violated (v^2={v*v}, x*z={x*z})")
        if w * w > y * z:
            raise ValueError(f"minor constraint w^2 <= y*z violated (w^2={w*w}, y*z={y*z})")
        lhs = 2 * u * v * w
        rhs = x * y * z - u * u * z - v * v * y - w * w * x
        if lhs != rhs:
            raise ValueError(
                "surface equation 2uvw = xyz - u^2*z - v^2*y - w^2*x violated "
                f"(lhs={lhs}, rhs={rhs})"
            )

    @classmethod
    def solve(cls, x, y, u, v, w, a) -> "Case3Params":
        """Construct on the surface by solving for z."""
        return cls(x, y, solve_for_z(x, y, u, v, w), u, v, w, a)

    def scaled(self, factor) -> "Case3Params":
        """Scale B by factor > 0 (a is unchanged); stays on the surface."""
        s = rational(factor)
        if s <= 0:
            raise ValueError("scale factor must be positive")
        return Case3Params(
            s * self.x, s * self.y, s * self.z,
            s * self.u, s * self.v, s * self.w, self.a,
        )

    def as_dict(self) -> dict:
        return {
            name: format_rational(getattr(self, name))
            for name in ("x", "y", "z", "u", "v", "w", "a")
        }


def solve_for_z(x, y, u, v, w) -> mpq:
    """z making det B vanish: z = (2uvw + v^2*y + w^2*x)/(xy - u^2).

    With x, y > 0 and u^2 < xy the top-left 2x2 block is positive
    definite and its Schur complement is zero at this z, so B is PSD
    and singular; the remaining minor constraints follow.
    """
    x, y, u, v, w = (rational(t) for t in (x, y, u, v, w))
    if u <= 0 or v <= 0 or w <= 0:
        raise ValueError(f"u,v,w>0 required (got u={u}, v={v}, w={w})")
    if x <= 0 or y <= 0:
        raise ValueError(f"x and y must be positive to solve for z (got x={x}, y={y})")
    det2 = x * y - u * u
    if det2 <= 0:
        raise ValueError(
            f"surface parameterization invalid here: needs u^2 < x*y (u^2={u*u}, x*y={x*y})"
        )
    return (2 * u * v * w + v * v * y + w * w * x) / det2


def build_case3_pair(params: Case3Params):
    """(A, B) = (diag(1, a, 0), the family's B); B is PSD with det B = 0."""
    a_mat = HermitianMatrix.diagonal((mpq(1), params.a, mpq(0)))
    b_mat = HermitianMatrix([
        [params.x, -params.u, -params.v],
        [-params.u, params.y, -params.w],
        [-params.v, -params.w, params.z],
    ])
    return a_mat, b_mat


@dataclass(frozen=True)
class PoleTerm:
    """weight / ((1-t)^i * (1-at)^j)."""

    i: int
    j: int
    weight: mpq


def pole_coefficient(i: int, j: int, a, m: int) -> mpq:
    """Exact t^m coefficient of (1-t)^(-i) * (1-at)^(-j).

    Sum over r of C(r+j-1, j-1) * a^r * C(m-r+i-1, i-1); a zero
    exponent collapses its factor to 1, pinning r to m (i=0) or 0 (j=0).
    """
    if i < 0 or j < 0:
        raise ValueError("pole exponents must be >= 0")
    if m < 0:
        raise ValueError("m must be >= 0")
    a = rational(a)
    if i == 0 and j == 0:
        return mpq(1) if m == 0 else mpq(0)
    if i == 0:
        return math.comb(m + j - 1, j - 1) * a**m
    if j == 0:
        return mpq(math.comb(m + i - 1, i - 1))
    total = mpq(0)
    for r in range(m + 1):
        total += math.comb(r + j - 1, j - 1) * a**r * math.comb(m - r + i - 1, i - 1)
    return total


def _diagonal_entry_terms(p: Case3Params):
    """Pole terms of the three diagonal entries of (B R)^3 where
    R = diag((1-t)^-1, (1-at)^-1, 1), before the trace prefactors.

    Derived by expanding the nine index paths of each cubed entry; the
    cross-engine identity test guards this table.
    """
    x, y, z, u, v, w = p.x, p.y, p.z, p.u, p.v, p.w
    mixed = -2 * u * v * w
    entry1 = (
        (3, 0, x**3),
        (2, 1, 2 * x * u * u),
        (2, 0, 2 * x * v * v),
        (1, 2, y * u * u),
        (1, 0, z * v * v),
        (1, 1, mixed),
    )
    entry2 = (
        (0, 3, y**3),
        (1, 2, 2 * y * u * u),
        (0, 2, 2 * y * w * w),
        (2, 1, x * u * u),
        (0, 1, z * w * w),
        (1, 1, mixed),
    )
    entry3 = (
        (0, 0, z**3),
        (1, 0, 2 * z * v * v),
        (0, 1, 2 * z * w * w),
        (2, 0, x * v * v),
        (0, 2, y * w * w),
        (1, 1, mixed),
    )
    # trace prefactor: entry 1 picks up another (1-t)^-1, entry 2
    # another (1-at)^-1, entry 3 nothing
    return ((1, 0, entry1), (0, 1, entry2), (0, 0, entry3))


def pole_terms(params: Case3Params) -> tuple:
    """The 18 assembled pole terms of the full trace series."""
    out = []
    for pre_i, pre_j, entries in _diagonal_entry_terms(params):
        for i, j, weight in entries:
            out.append(PoleTerm(i + pre_i, j + pre_j, weight))
    return tuple(out)


def case3_series(params: Case3Params, order: int) -> tuple:
    """Exact t^m coefficients, m = 0..order, of the degree-3 trace series."""
    if order < 0:
        raise ValueError("order must be >= 0")
    terms = pole_terms(params)
    out = []
    for m in range(order + 1):
        total = mpq(0)
        for term in terms:
            if term.weight:
                total += term.weight * pole_coefficient(term.i, term.j, params.a, m)
        out.append(total)
    return tuple(out)


def crosscheck_series(params: Case3Params, order: int) -> tuple:
    """The same series from the generic resolvent engine (independent route)."""
    a_mat, b_mat = build_case3_pair(params)
    series = resolvent_series(a_mat, b_mat, 4, order)
    return tuple(real_trace(series.coefficient(m)) for m in range(order + 1))


@dataclass(frozen=True)
class Case3PointResult:
    params: Case3Params
    coefficients: tuple
    violations: tuple  # (m, value) with value < 0


@dataclass(frozen=True)
class Case3Report:
    order: int
    crosscheck: bool
    points: tuple

    @property
    def violations_total(self) -> int:
        return sum(len(p.violations) for p in self.points)


def case3_scan(points: Sequence[Case3Params], order: int, *, crosscheck: bool = True) -> Case3Report:
    """Evaluate the closed-form series per point; optionally verify every
    coefficient against the resolvent engine; certify negatives always."""
    points = tuple(points)
    if not points:
        raise ValueError("grid contains no points")
    if order < 0:
        raise ValueError("order must be >= 0")
    results = []
    for idx, params in enumerate(points):
        coeffs = case3_series(params, order)
        if crosscheck:
            other = crosscheck_series(params, order)
            for m, (got, want) in enumerate(zip(coeffs, other)):
                if got != want:
                    raise ConsistencyError(
                        f"closed form disagrees with resolvent engine at point "
                        f"{idx}, m={m}: {got} vs {want}"
                    )
        violations = []
        for m, value in enumerate(coeffs):
            if value < 0:
                if not crosscheck:
                    a_mat, b_mat = build_case3_pair(params)
                    check = real_trace(
                        resolvent_series(a_mat, b_mat, 4, m).coefficient(m)
                    )
                    if check != value:
                        raise ConsistencyError(
                            f"negative coefficient not reproduced at point {idx}, "
                            f"m={m}: {value} vs {check}"
                        )
                violations.append((m, value))
        results.append(Case3PointResult(params, coeffs, tuple(violations)))
    return Case3Report(order=order, crosscheck=crosscheck, points=tuple(results))


GRID_PARAM_NAMES = ("x", "y", "u", "v", "w", "a")


def parse_grid(obj) -> tuple:
    """Parse a grid JSON object into (points, order_or_None).

    Two shapes are accepted:
      {"axes": {"x": [...], ..., "a": [...]}, "order": N}
        cartesian product over the six parameter lists (z solved), and
      {"points": [{"x": "1", ..., "a": "1/2"}, ...], "order": N}
        explicit points; each may give "z" or omit it to solve.
    "order" is optional here (the CLI can supply it as a flag).
    """
    if not isinstance(obj, dict):
        raise ValueError("grid JSON must be an object")
    order = obj.get("order")
    if order is not None and (not isinstance(order, int) or isinstance(order, bool) or order < 0):
        raise ValueError('"order" must be a nonnegative integer')
    has_axes = "axes" in obj
    has_points = "points" in obj
    if has_axes == has_points:
        raise ValueError('grid JSON needs exactly one of "axes" or "points"')
    allowed_top = {"axes", "points", "order"}
    unknown = set(obj) - allowed_top
    if unknown:
        raise ValueError(f"unknown grid fields: {sorted(unknown)}")

    points = []
    if has_axes:
        axes = obj["axes"]
        if not isinstance(axes, dict):
            raise ValueError('"axes" must be an object')
        unknown = set(axes) - set(GRID_PARAM_NAMES)
        if unknown:
            raise ValueError(f"unknown grid axes: {sorted(unknown)}")
        lists = []
        for name in GRID_PARAM_NAMES:
            if name not in axes:
                raise ValueError(f'grid axis "{name}" is missing')
            values = axes[name]
            if not isinstance(values, list) or not values:
                raise ValueError(f'grid axis "{name}" must be a nonempty list')
            lists.append([_grid_rational(v, f'axis "{name}"') for v in values])
        for combo in itertools.product(*lists):
            x, y, u, v, w, a = combo
            points.append(Case3Params.solve(x, y, u, v, w, a))
    else:
        raw_points = obj["points"]
        if not isinstance(raw_points, list) or not raw_points:
            raise ValueError('"points" must be a nonempty list')
        for idx, entry in enumerate(raw_points):
            if not isinstance(entry, dict):
                raise ValueError(f"point {idx} must be an object")
            allowed = set(GRID_PARAM_NAMES) | {"z"}
            unknown = set(entry) - allowed
            if unknown:
                raise ValueError(f"point {idx} has unknown fields: {sorted(unknown)}")
            values = {}
            for name in GRID_PARAM_NAMES:
                if name not in entry:
                    raise ValueError(f'point {idx} is missing "{name}"')
                values[name] = _grid_rational(entry[name], f'point {idx} field "{name}"')
            if "z" in entry:
                z = _grid_rational(entry["z"], f'point {idx} field "z"')
                points.append(Case3Params(values["x"], values["y"], z,
                                          values["u"], values["v"], values["w"],
                                          values["a"]))
            else:
                points.append(Case3Params.solve(values["x"], values["y"],
                                                values["u"], values["v"],
                                                values["w"], values["a"]))
    return tuple(points), order


def _grid_rational(value, where: str) -> mpq:
    if not isinstance(value, str):
        raise ValueError(f"{where}: rationals must be strings like \"1/2\"")
    try:
        return parse_rational(value)
    except ValueError as exc:
        raise ValueError(f"{where}: {exc}") from None


# ---------------------------------------------------------------------------
# Serialization (same discipline as scan: no timing, fully deterministic).

def point_result_to_obj(result: Case3PointResult) -> dict:
    return {
        "params": result.params.as_dict(),
        "coefficients": [format_rational(c) for c in result.coefficients],
        "violations": [
            {"m": m, "value": format_rational(value)}
            for m, value in result.violations
        ],
    }


def case3_report_to_obj(report: Case3Report) -> dict:
    return {
        "order": report.order,
        "crosscheck": report.crosscheck,
        "violations_total": report.violations_total,
        "points": [point_result_to_obj(p) for p in report.points],
    }


CASE3_CSV_HEADER = ("point", "m", "value", "sign")


def case3_csv_rows(report: Case3Report):
    for idx, result in enumerate(report.points):
        for m, value in enumerate(result.coefficients):
            yield (idx, m, format_rational(value), sign_symbol(value))
