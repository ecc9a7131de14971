"""Small dense linear algebra over ``Fraction`` or ``float``.

Every routine works on plain nested lists so that the exact backend never
touches binary floating point.  Float comparisons use the global absolute
tolerance :data:`EPS`.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

EPS = 1e-9

Number = Fraction | float


class BackendError(TypeError):
    """Raised when exact and float scalars meet in one operation."""


def parse_scalar(value, backend: str) -> Number:
    if backend == "exact":
        if isinstance(value, float):
            raise BackendError(f"float {value!r} given to the exact backend")
        return Fraction(value)
    if isinstance(value, str):
        return float(Fraction(value))
    return float(value)


def backend_of(values) -> str:
    """Return ``"exact"`` or ``"float"`` for a flat iterable of scalars."""
    kinds = set()
    for v in values:
        if isinstance(v, bool):
            raise BackendError("booleans are not scalars")
        if isinstance(v, (Fraction, int)):
            kinds.add("exact")
        elif isinstance(v, float):
            kinds.add("float")
        else:
            raise BackendError(f"unsupported scalar type {type(v).__name__}")
    if len(kinds) > 1:
        raise BackendError("mixed exact/float scalars")
    return kinds.pop() if kinds else "exact"


def is_zero(x: Number) -> bool:
    if isinstance(x, float):
        return abs(x) <= EPS
    return x == 0


def sign(x: Number) -> int:
    if is_zero(x):
        return 0
    return 1 if x > 0 else -1


def leq(x: Number, y: Number) -> bool:
    """``x <= y`` with the float tolerance applied."""
    if isinstance(x, float) or isinstance(y, float):
        return x <= y + EPS
    return x <= y


def dot(u: Sequence[Number], v: Sequence[Number]) -> Number:
    return sum((a * b for a, b in zip(u, v)), start=type(u[0])(0) if u else 0)


def scale(t: Number, v: Sequence[Number]) -> tuple:
    return tuple(t * a for a in v)


def add(u, v) -> tuple:
    return tuple(a + b for a, b in zip(u, v))


def sub(u, v) -> tuple:
    return tuple(a - b for a, b in zip(u, v))


def norm1(v) -> Number:
    return sum(abs(a) for a in v)


def norm2_sq(v) -> Number:
    return dot(v, v)


def matvec(m, v) -> tuple:
    return tuple(dot(row, v) for row in m)


def matmul(a, b) -> list:
    cols = list(zip(*b))
    return [[dot(row, col) for col in cols] for row in a]


def transpose(m) -> list:
    return [list(r) for r in zip(*m)]


def identity(n: int, exact: bool = True) -> list:
    one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def _pivot(rows, col: int, start: int) -> int | None:
    best, best_abs = None, None
    for r in range(start, len(rows)):
        x = rows[r][col]
        if is_zero(x):
            continue
        if isinstance(x, Fraction):
            return r
        if best_abs is None or abs(x) > best_abs:
            best, best_abs = r, abs(x)
    return best


def det(m) -> Number:
    n = len(m)
    if n == 0:
        return Fraction(1)
    a = [list(r) for r in m]
    result = a[0][0] * 0 + 1
    for c in range(n):
        p = _pivot(a, c, c)
        if p is None:
            return result * 0
        if p != c:
            a[c], a[p] = a[p], a[c]
            result = -result
        piv = a[c][c]
        result *= piv
        for r in range(c + 1, n):
            f = a[r][c]
            if f == 0:
                continue
            f = f / piv
            row_c = a[c]
            a[r] = [x - f * y for x, y in zip(a[r], row_c)]
    return result


def rank(rows) -> int:
    a = [list(r) for r in rows]
    if not a:
        return 0
    ncols = len(a[0])
    rk = 0
    for c in range(ncols):
        p = _pivot(a, c, rk)
        if p is None:
            continue
        a[rk], a[p] = a[p], a[rk]
        piv = a[rk][c]
        for r in range(rk + 1, len(a)):
            f = a[r][c]
            if is_zero(f):
                continue
            f = f / piv
            a[r] = [x - f * y for x, y in zip(a[r], a[rk])]
        rk += 1
        if rk == len(a):
            break
    return rk


def solve(m, b) -> tuple | None:
    """Solve the square system ``m x = b``; ``None`` if singular."""
    n = len(m)
    a = [list(r) + [bi] for r, bi in zip(m, b)]
    for c in range(n):
        p = _pivot(a, c, c)
        if p is None:
            return None
        a[c], a[p] = a[p], a[c]
        piv = a[c][c]
        a[c] = [x / piv for x in a[c]]
        for r in range(n):
            if r != c and not (a[r][c] == 0):
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return tuple(row[n] for row in a)


def inverse(m) -> list | None:
    n = len(m)
    one = m[0][0] * 0 + 1
    zero = one * 0
    a = [list(r) + [one if i == j else zero for j in range(n)] for i, r in enumerate(m)]
    for c in range(n):
        p = _pivot(a, c, c)
        if p is None:
            return None
        a[c], a[p] = a[p], a[c]
        piv = a[c][c]
        a[c] = [x / piv for x in a[c]]
        for r in range(n):
            if r != c and not (a[r][c] == 0):
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [row[n:] for row in a]


def nullspace(rows, ncols: int) -> list:
    """Basis of ``{x : r.x = 0 for r in rows}``."""
    a = [list(r) for r in rows]
    pivots = []
    rk = 0
    for c in range(ncols):
        p = _pivot(a, c, rk)
        if p is None:
            continue
        a[rk], a[p] = a[p], a[rk]
        piv = a[rk][c]
        a[rk] = [x / piv for x in a[rk]]
        for r in range(len(a)):
            if r != rk and not is_zero(a[r][c]):
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[rk])]
        pivots.append(c)
        rk += 1
        if rk == len(a):
            break
    exact = not any(isinstance(x, float) for r in rows for x in r)
    one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
    basis = []
    for free in range(ncols):
        if free in pivots:
            continue
        v = [zero] * ncols
        v[free] = one
        for i, pc in enumerate(pivots):
            v[pc] = -a[i][free]
        basis.append(tuple(v))
    return basis
