"""Float hot loops: flag determinant sums and containment scans.

Each kernel has a numba ``@njit`` body and a vectorised numpy body.  The
numba path is used when numba imports and ``MAHLERCUBE_DISABLE_NUMBA`` is
unset or ``0``; otherwise the numpy path runs.  Both must agree to float
round-off; ``tests/test_kernels.py`` checks that.
"""

from __future__ import annotations

import math
import os

import numpy as np


def _numba_requested() -> bool:
    return os.environ.get("MAHLERCUBE_DISABLE_NUMBA", "0") in ("", "0")


try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


# --- numpy path -----------------------------------------------------------

def flag_volume_sum_numpy(points, flag_faces, signs):
    mats = points[flag_faces]  # (flags, n, n); rows are the flag points
    dets = np.linalg.det(mats)
    n = points.shape[1]
    return float(np.dot(signs, dets)) / math.factorial(n)


def first_order_numpy(points, deltas, flag_faces, signs):
    n = points.shape[1]
    mats = points[flag_faces]
    dmats = deltas[flag_faces]
    total = np.zeros(len(flag_faces))
    for j in range(n):
        m = mats.copy()
        m[:, j, :] = dmats[:, j, :]
        total += np.linalg.det(m)
    return float(np.dot(signs, total)) / math.factorial(n)


def max_violation_numpy(normals, points, scale):
    if len(points) == 0:
        return -np.inf
    return float((points @ normals.T - scale).max())


# --- numba path -----------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _det_inplace(a):
        n = a.shape[0]
        d = 1.0
        for c in range(n):
            p = c
            best = abs(a[c, c])
            for r in range(c + 1, n):
                if abs(a[r, c]) > best:
                    best = abs(a[r, c])
                    p = r
            if best == 0.0:
                return 0.0
            if p != c:
                for k in range(n):
                    tmp = a[c, k]
                    a[c, k] = a[p, k]
                    a[p, k] = tmp
                d = -d
            piv = a[c, c]
            d *= piv
            for r in range(c + 1, n):
                f = a[r, c] / piv
                if f != 0.0:
                    for k in range(c, n):
                        a[r, k] -= f * a[c, k]
        return d

    @njit(cache=True)
    def _flag_volume_sum_nb(points, flag_faces, signs):
        nflags, n = flag_faces.shape
        a = np.empty((n, n))
        total = 0.0
        for f in range(nflags):
            for j in range(n):
                src = flag_faces[f, j]
                for k in range(n):
                    a[j, k] = points[src, k]
            total += signs[f] * _det_inplace(a)
        return total

    @njit(cache=True)
    def _first_order_nb(points, deltas, flag_faces, signs):
        nflags, n = flag_faces.shape
        a = np.empty((n, n))
        total = 0.0
        for f in range(nflags):
            acc = 0.0
            for col in range(n):
                for j in range(n):
                    src = flag_faces[f, j]
                    if j == col:
                        for k in range(n):
                            a[j, k] = deltas[src, k]
                    else:
                        for k in range(n):
                            a[j, k] = points[src, k]
                acc += _det_inplace(a)
            total += signs[f] * acc
        return total

    @njit(cache=True)
    def _max_violation_nb(normals, points, scale):
        best = -np.inf
        for i in range(points.shape[0]):
            for j in range(normals.shape[0]):
                s = 0.0
                for k in range(points.shape[1]):
                    s += points[i, k] * normals[j, k]
                if s - scale > best:
                    best = s - scale
        return best

    def flag_volume_sum_numba(points, flag_faces, signs):
        n = points.shape[1]
        return _flag_volume_sum_nb(points, flag_faces, signs) / math.factorial(n)

    def first_order_numba(points, deltas, flag_faces, signs):
        n = points.shape[1]
        return _first_order_nb(points, deltas, flag_faces, signs) / math.factorial(n)

    def max_violation_numba(normals, points, scale):
        if len(points) == 0:
            return -np.inf
        return float(_max_violation_nb(normals, points, float(scale)))


def using_numba() -> bool:
    return HAVE_NUMBA and _numba_requested()


def flag_volume_sum(points, flag_faces, signs):
    """``sum_f signs[f] * det(points[flag_faces[f]]) / n!``."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    if using_numba():
        return flag_volume_sum_numba(points, flag_faces, signs)
    return flag_volume_sum_numpy(points, flag_faces, signs)


def first_order(points, deltas, flag_faces, signs):
    """Linear coefficient in ``t`` of ``flag_volume_sum(points + t*deltas)``."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    deltas = np.ascontiguousarray(deltas, dtype=np.float64)
    if using_numba():
        return first_order_numba(points, deltas, flag_faces, signs)
    return first_order_numpy(points, deltas, flag_faces, signs)


def max_violation(normals, points, scale=1.0):
    """``max_{i,j} points[i] . normals[j] - scale``.

    Always the numpy path: one BLAS product beats the jitted double loop from
    n = 4 up (see ``benchmarks/bench_kernels.py``).
    """
    normals = np.ascontiguousarray(normals, dtype=np.float64)
    points = np.ascontiguousarray(points, dtype=np.float64)
    return max_violation_numpy(normals, points, scale)
