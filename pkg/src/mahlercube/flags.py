"""Faces and flags of the cube and the flag-simplex volume polynomial.

A face is its center, a sign vector over {-1, 0, 1}; the zero entries are the
free coordinates.  A flag ``(eps, pi)`` starts at vertex ``eps`` and frees the
coordinates ``pi[0], pi[1], ...`` one at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations, product
from typing import Mapping

import numpy as np

from . import _kernels
from . import linalg as la

MAX_FLAG_DIM = 8

CubeFace = tuple  # sign vector


def face_dim(F: CubeFace) -> int:
    return sum(1 for s in F if s == 0)


def support(F: CubeFace) -> list:
    return [i for i, s in enumerate(F) if s != 0]


def free_coords(F: CubeFace) -> list:
    return [i for i, s in enumerate(F) if s == 0]


def face_contains(G: CubeFace, F: CubeFace) -> bool:
    """True iff face ``F`` is a subset of face ``G``."""
    return all(g == 0 or g == f for f, g in zip(F, G))


def _check_dim(n: int):
    if not 1 <= n <= MAX_FLAG_DIM:
        raise ValueError(f"dimension {n} outside 1..{MAX_FLAG_DIM}")


@lru_cache(maxsize=None)
def enumerate_faces(n: int) -> tuple:
    _check_dim(n)
    return tuple(F for F in product((-1, 0, 1), repeat=n) if any(F))


@dataclass(frozen=True)
class Flag:
    epsilon: tuple
    pi: tuple

    def faces(self) -> tuple:
        F = list(self.epsilon)
        out = [tuple(F)]
        for i in self.pi[:-1]:
            F[i] = 0
            out.append(tuple(F))
        return tuple(out)


@lru_cache(maxsize=None)
def enumerate_flags(n: int) -> tuple:
    _check_dim(n)
    return tuple(Flag(eps, pi) for eps in product((-1, 1), repeat=n)
                 for pi in permutations(range(n)))


def dual_center(F: CubeFace) -> tuple:
    k = len(F) - face_dim(F)
    return tuple(Fraction(s, k) for s in F)


# --- flag points --------------------------------------------------------------

class FlagPoints(dict):
    """Mapping face -> point, one for every proper face of the cube."""

    def __init__(self, dim: int, points: Mapping):
        super().__init__(points)
        self.dim = dim
        missing = set(enumerate_faces(dim)) - set(self)
        if missing:
            raise ValueError(f"{len(missing)} faces have no point, e.g. {min(missing)}")

    @property
    def backend(self) -> str:
        return la.backend_of(x for v in self.values() for x in v)

    def is_antisymmetric(self) -> bool:
        return all(tuple(-x for x in self[F]) == tuple(self[tuple(-s for s in F)])
                   for F in self)

    def shifted(self, deltas: Mapping, t=1) -> "FlagPoints":
        pts = dict(self)
        for F, d in deltas.items():
            pts[F] = tuple(x + t * y for x, y in zip(pts[F], d))
        return FlagPoints(self.dim, pts)


def base_points(n: int, a=None) -> FlagPoints:
    """``x_F = a[dim F] * c_F``; ``a`` defaults to all ones."""
    if a is None:
        a = [Fraction(1)] * n
    return FlagPoints(n, {F: tuple(a[face_dim(F)] * Fraction(s) for s in F)
                          for F in enumerate_faces(n)})


def base_dual_points(n: int) -> FlagPoints:
    return FlagPoints(n, {F: dual_center(F) for F in enumerate_faces(n)})


@lru_cache(maxsize=None)
def _flag_tables(n: int):
    faces = enumerate_faces(n)
    index = {F: i for i, F in enumerate(faces)}
    flags = enumerate_flags(n)
    table = np.array([[index[F] for F in fl.faces()] for fl in flags], dtype=np.int64)
    signs = []
    for fl in flags:
        d = la.det([[Fraction(s) for s in F] for F in fl.faces()])
        signs.append(1 if d > 0 else -1)
    return faces, index, flags, table, np.array(signs, dtype=np.float64), tuple(signs)


def flag_orientation(fl: Flag) -> int:
    n = len(fl.epsilon)
    _, _, flags, _, _, signs = _flag_tables(n)
    return signs[flags.index(fl)]


def flag_simplex_signed_volume(X: FlagPoints, fl: Flag):
    n = X.dim
    return flag_orientation(fl) * la.det([X[F] for F in fl.faces()]) / math.factorial(n)


def _as_array(X: FlagPoints):
    faces = enumerate_faces(X.dim)
    return np.array([[float(x) for x in X[F]] for F in faces], dtype=np.float64)


def g_volume(X: FlagPoints):
    """Signed volume polynomial: the sum of all flag-simplex volumes."""
    n = X.dim
    faces, _, flags, table, signs_arr, signs = _flag_tables(n)
    if X.backend == "float":
        return _kernels.flag_volume_sum(_as_array(X), table, signs_arr)
    total = Fraction(0)
    for fl, s in zip(flags, signs):
        d = la.det([X[F] for F in fl.faces()])
        total += d if s > 0 else -d
    return total / math.factorial(n)


def per_flag_volumes(X: FlagPoints) -> list:
    n = X.dim
    _, _, flags, _, _, signs = _flag_tables(n)
    f = math.factorial(n)
    return [s * la.det([X[F] for F in fl.faces()]) / f for fl, s in zip(flags, signs)]


# --- alpha weights and the Q pair ---------------------------------------------

class AlphaWeights(dict):
    """Mapping face -> positive weight; the dual weight is the reciprocal."""

    def __init__(self, dim: int, alpha: Mapping):
        super().__init__(alpha)
        self.dim = dim
        for F, a in self.items():
            if not a > 0:
                raise ValueError(f"weight at {F} is not positive: {a}")
        missing = set(enumerate_faces(dim)) - set(self)
        if missing:
            raise ValueError(f"{len(missing)} faces have no weight")

    def dual(self, F):
        return 1 / self[F]

    @classmethod
    def constant(cls, n: int, value=Fraction(1)) -> "AlphaWeights":
        return cls(n, {F: value for F in enumerate_faces(n)})

    @classmethod
    def by_dimension(cls, n: int, a) -> "AlphaWeights":
        return cls(n, {F: a[face_dim(F)] for F in enumerate_faces(n)})


def build_Q_pair(w: AlphaWeights):
    n = w.dim
    Q = {F: tuple(w[F] * s for s in F) for F in enumerate_faces(n)}
    Qp = {F: tuple(w.dual(F) * c for c in dual_center(F)) for F in enumerate_faces(n)}
    return FlagPoints(n, Q), FlagPoints(n, Qp)


@lru_cache(maxsize=None)
def cube_mahler(n: int) -> Fraction:
    """``P(B_inf^n)``, from the two tiling sums."""
    return g_volume(base_points(n)) * g_volume(base_dual_points(n))


def lemma7_gap(w: AlphaWeights):
    Q, Qp = build_Q_pair(w)
    return g_volume(Q) * g_volume(Qp) - cube_mahler(w.dim)
