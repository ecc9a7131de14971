"""First- and second-order behaviour of the flag volume polynomial ``g``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from . import linalg as la
from .flags import (FlagPoints, _as_array, _flag_tables, enumerate_faces, face_dim,
                    free_coords, g_volume, support)
from .geometry import _sqrt


@dataclass
class Perturbation:
    """Per-face displacement vectors, zero off ``support``."""

    deltas: dict

    @property
    def support(self) -> frozenset:
        return frozenset(self.deltas)

    @property
    def magnitude(self):
        if not self.deltas:
            return Fraction(0)
        return max(_sqrt(la.norm2_sq(d)) for d in self.deltas.values())

    def is_orthogonal(self) -> bool:
        return all(la.is_zero(la.dot(d, F)) for F, d in self.deltas.items())

    def as_array(self, n: int):
        faces = enumerate_faces(n)
        out = np.zeros((len(faces), n))
        for i, F in enumerate(faces):
            if F in self.deltas:
                out[i] = [float(x) for x in self.deltas[F]]
        return out


def directional_derivative(X0: FlagPoints, d: Perturbation, h):
    """Central difference ``(g(X0 + h d) - g(X0 - h d)) / 2h``."""
    if h == 0:
        raise ValueError("step h must be nonzero")
    return (g_volume(X0.shifted(d.deltas, h)) - g_volume(X0.shifted(d.deltas, -h))) / (2 * h)


def first_order_coefficient(X0: FlagPoints, d: Perturbation):
    """Exact ``t``-coefficient of ``g(X0 + t d)``.

    Each flag term is a determinant, multilinear in its columns, so the linear
    coefficient is the sum of determinants with one column replaced.
    """
    n = X0.dim
    faces, _, flags, table, signs_arr, signs = _flag_tables(n)
    if X0.backend == "float":
        return _kernels.first_order(_as_array(X0), d.as_array(n), table, signs_arr)
    total = Fraction(0)
    for fl, s in zip(flags, signs):
        fs = fl.faces()
        touched = [j for j, F in enumerate(fs) if F in d.deltas]
        if not touched:
            continue
        cols = [X0[F] for F in fs]
        for j in touched:
            m = list(cols)
            m[j] = d.deltas[fs[j]]
            total += s * la.det(m)
    return total / math.factorial(n)


def is_base_configuration(X0: FlagPoints) -> bool:
    scales = {}
    for F, x in X0.items():
        k = face_dim(F)
        i = support(F)[0]
        a = x[i] / F[i]
        if any(not la.is_zero(xj - a * s) for xj, s in zip(x, F)):
            return False
        if k in scales and not la.is_zero(scales[k] - a):
            return False
        scales[k] = a
    return all(a > 0 for a in scales.values())


def kernel_residual(X0: FlagPoints, d: Perturbation, h0: float = 1e-2):
    """First-order term of ``g`` at a base configuration along an orthogonal
    perturbation; zero exactly on the exact backend."""
    if not d.is_orthogonal():
        bad = next(F for F, v in d.deltas.items() if not la.is_zero(la.dot(v, F)))
        raise ValueError(f"perturbation at face {bad} is not orthogonal to its center")
    if not is_base_configuration(X0):
        raise ValueError("X0 is not of the form a_{dim F} c_F")
    if X0.backend == "exact":
        return first_order_coefficient(X0, d)
    coarse = directional_derivative(X0, d, h0)
    fine = directional_derivative(X0, d, h0 / 2)
    return (4 * fine - coarse) / 3


def second_order_gap(X0: FlagPoints, X1: FlagPoints, X2: FlagPoints):
    """``(|g(X1) - g(X2)|, max face-wise distance of X1, X2 from X0)``."""
    gap = abs(g_volume(X1) - g_volume(X2))
    dist = Fraction(0) if X0.backend == "exact" else 0.0
    for X in (X1, X2):
        for F in X0:
            dist = max(dist, la.norm2_sq(la.sub(X[F], X0[F])))
    return gap, _sqrt(dist)


def orthogonal_directions(F) -> list:
    """Basis of ``c_F``'s orthogonal complement: free axes ``e_j`` and
    ``s_i e_i - s_j e_j`` for supported ``i < j`` (``s`` the signs of ``F``)."""
    n = len(F)
    out = []
    for j in free_coords(F):
        v = [Fraction(0)] * n
        v[j] = Fraction(1)
        out.append(tuple(v))
    sup = support(F)
    for a, i in enumerate(sup):
        for j in sup[a + 1:]:
            v = [Fraction(0)] * n
            v[i] = Fraction(F[i])
            v[j] = Fraction(-F[j])
            out.append(tuple(v))
    return out


def finite_difference(X0: FlagPoints, d: Perturbation, order: int, h=Fraction(1)):
    """Forward difference of ``t -> g(X0 + t d)`` of the given order at 0."""
    return sum((-1) ** (order - k) * math.comb(order, k) * g_volume(X0.shifted(d.deltas, k * h))
               for k in range(order + 1))


def loglog_slope(hs, values) -> float:
    """Least-squares slope of ``log|value|`` against ``log h``."""
    x = np.log(np.asarray(hs, dtype=float))
    y = np.log(np.abs(np.asarray(values, dtype=float)))
    return float(np.polyfit(x, y, 1)[0])
