"""Putting a body near the cube into position, and cube/cross-polytope contact pairs.

The enclosing-parallelepiped search is exhaustive over facet normals.  For a
symmetric ``K`` a parallelepiped ``{x : |u_i . x| <= 1}`` contains ``K`` iff
every ``u_i`` lies in ``K*``, and its volume is ``2^n / |det U|``.  The
determinant is linear in each row, so its maximum over ``(K*)^n`` is attained
with every row a vertex of ``K*``, i.e. a facet normal of ``K``.  Scanning all
n-subsets of facet normals therefore finds a global minimiser.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations
from math import comb

from . import linalg as la
from .flags import CubeFace, dual_center, face_dim, free_coords, support
from .geometry import (GeometryError, HPolytope, LinearMap, VPolytope, _sqrt,
                       max_scaled_cube, maximize_linear)

PARALLELEPIPED_SUBSET_LIMIT = 100_000


class ContactError(RuntimeError):
    """A contact-pair postcondition failed."""


# --- enclosing parallelepiped and canonical position ---------------------------

def _canonical_sign(v):
    for x in v:
        if not la.is_zero(x):
            return v if x > 0 else tuple(-y for y in v)
    return v


def _order_rows(rows):
    n = len(rows)
    best = None
    for perm in permutations(range(n)):
        ordered = [rows[p] for p in perm]
        diag = 1
        for i in range(n):
            diag *= abs(ordered[i][i])
        signed = [r if la.is_zero(r[i]) or r[i] > 0 else tuple(-x for x in r)
                  for i, r in enumerate(ordered)]
        signed = [r if not la.is_zero(r[i]) else _canonical_sign(r)
                  for i, r in enumerate(signed)]
        key = (-diag, tuple(tuple(r) for r in signed))
        if best is None or key < best[0]:
            best = (key, signed)
    return best[1], -best[0][0]


def minimal_parallelepiped(K: VPolytope) -> LinearMap:
    """``T`` with ``K`` inside ``T B_inf^n`` of least volume.

    Raises :class:`GeometryError` when the facet-touch certificate fails.
    """
    if not K.symmetric:
        raise GeometryError("minimal_parallelepiped needs a symmetric body")
    n = K.dim
    reps = []
    for a in K.facet_normals:
        a = _canonical_sign(a)
        if not any(all(la.is_zero(x - y) for x, y in zip(a, b)) for b in reps):
            reps.append(a)
    reps.sort()
    if comb(len(reps), n) > PARALLELEPIPED_SUBSET_LIMIT:
        raise GeometryError(f"{comb(len(reps), n)} normal subsets exceed the search limit")
    best_det, best = None, []
    for sub in combinations(reps, n):
        d = abs(la.det(list(sub)))
        if la.is_zero(d):
            continue
        if best_det is None or (d > best_det and not la.is_zero(d - best_det)):
            best_det, best = d, [sub]
        elif la.is_zero(d - best_det):
            best.append(sub)
    chosen = None
    for sub in best:
        rows, diag = _order_rows(list(sub))
        key = (-diag, tuple(rows))
        if chosen is None or key < chosen[0]:
            chosen = (key, rows)
    U = chosen[1]
    T = LinearMap(tuple(tuple(r) for r in la.inverse(U)))
    if not all(facet_touch_certificate(K, T)):
        raise GeometryError("parallelepiped search failed the facet-touch certificate")
    return T


def facet_touch_certificate(K: VPolytope, T: LinearMap) -> list:
    """For each ``j``: ``T^{-1} K`` lies in the cube and touches both facets
    ``x_j = +-1``."""
    Khat = K.mapped(T.inverse().matrix)
    out = []
    for j in range(K.dim):
        vals = [v[j] for v in Khat.vertices]
        ok = (la.is_zero(max(vals) - 1) and la.is_zero(min(vals) + 1)
              and all(la.leq(abs(x), 1) for v in Khat.vertices for x in v))
        out.append(ok)
    return out


def canonicalize_with_map(K: VPolytope):
    T = minimal_parallelepiped(K)
    Khat = K.mapped(T.inverse().matrix)
    Khat = VPolytope(Khat.dim, tuple(sorted(Khat.vertices)), Khat.backend, True)
    delta = 1 - max_scaled_cube(Khat)
    return Khat, delta, T


def canonicalize(K: VPolytope):
    """``(T^{-1} K, delta)`` with ``(1 - delta) B_inf^n`` the largest cube inside."""
    Khat, delta, _ = canonicalize_with_map(K)
    return Khat, delta


def bm_distance_upper_bound(K: VPolytope):
    _, delta = canonicalize(K)
    return 1 / (1 - delta)


# --- the operator A -------------------------------------------------------------

@dataclass(frozen=True)
class OperatorA:
    """Self-adjoint positive definite map with ``A x = x_star``.

    On the plane through ``e1 = x`` and ``e2`` (orthogonal to ``x``, same
    length) it has matrix ``[[a, b], [b, a_prime]]``; elsewhere it is the
    identity.  ``e2_direction`` is stored unnormalised so exact inputs stay
    rational; ``b`` is then ``|e2_direction| / |x|``.
    """

    e1: tuple
    e2_direction: tuple
    a: object
    b_squared: object
    a_prime: object
    matrix: tuple

    @property
    def b(self):
        return _sqrt(self.b_squared)

    def apply(self, v) -> tuple:
        return la.matvec(self.matrix, v)

    def is_positive_definite(self) -> bool:
        m = self.matrix
        n = len(m)
        return all(la.det([row[:k] for row in m[:k]]) > 0 for k in range(1, n + 1))

    def is_self_adjoint(self) -> bool:
        m = self.matrix
        return all(la.is_zero(m[i][j] - m[j][i]) for i in range(len(m)) for j in range(len(m)))


def build_operator_A(x, x_star) -> OperatorA:
    if not la.is_zero(la.dot(x, x_star) - 1):
        raise ValueError("x . x_star must equal 1")
    n = len(x)
    exact = not isinstance(x[0], float)
    one = Fraction(1) if exact else 1.0
    xx = la.norm2_sq(x)
    w = la.sub(x_star, la.scale(1 / xx, x))
    ww = la.norm2_sq(w)
    a = 1 / xx
    if la.is_zero(ww):
        b_sq = one * 0
        a_prime = one
        w = tuple(one * 0 for _ in x)
    else:
        b_sq = ww / xx
        a_prime = (b_sq + 1) / a
    m = [[(one if i == j else one * 0) - x[i] * x[j] / xx for j in range(n)] for i in range(n)]
    if not la.is_zero(ww):
        for i in range(n):
            for j in range(n):
                m[i][j] += (x[i] * w[j] + w[i] * x[j]) / xx
                m[i][j] += (a_prime - 1) * w[i] * w[j] / ww
    for i in range(n):
        for j in range(n):
            m[i][j] += a * x[i] * x[j] / xx
    return OperatorA(tuple(x), tuple(w), a, b_sq, a_prime, tuple(tuple(r) for r in m))


# --- contact pairs -------------------------------------------------------------

@dataclass(frozen=True)
class ContactPair:
    face: CubeFace
    y: tuple
    y_star: tuple
    alpha: object
    h: tuple
    h_star: tuple

    def violations(self) -> list:
        F = self.face
        out = []
        c = tuple(Fraction(s) if not isinstance(self.alpha, float) else float(s) for s in F)
        cs = dual_center(F)
        if not la.is_zero(la.dot(self.y, self.y_star) - 1):
            out.append("y . y_star != 1")
        if not self.alpha > 0:
            out.append("alpha <= 0")
        if not la.is_zero(la.dot(self.h, c)):
            out.append("h not orthogonal to c_F")
        if any(not la.is_zero(self.h[j]) for j in free_coords(F)):
            out.append("h has free-coordinate part")
        if any(not la.is_zero(self.h_star[i]) for i in support(F)):
            out.append("h_star has supported-coordinate part")
        recon = la.add(la.scale(self.alpha, c), self.h)
        if any(not la.is_zero(p - q) for p, q in zip(recon, self.y)):
            out.append("y != alpha c_F + h")
        recon = la.add(la.scale(1 / self.alpha, cs), self.h_star)
        if any(not la.is_zero(p - q) for p, q in zip(recon, self.y_star)):
            out.append("y_star != c*_F / alpha + h_star")
        return out

    def negated(self) -> "ContactPair":
        neg = lambda v: tuple(-x for x in v)
        return ContactPair(neg(self.face), neg(self.y), neg(self.y_star), self.alpha,
                           neg(self.h), neg(self.h_star))


def _unit(n, i, one):
    v = [one * 0] * n
    v[i] = one
    return tuple(v)


def contact_pair(K: VPolytope, F: CubeFace, K_star: HPolytope | None = None) -> ContactPair:
    """Contact pair of a canonical ``K`` for the dual faces ``F`` and ``F*``.

    ``y`` maximises ``c_F . x`` over the supported-coordinate section of ``K``;
    ``y_star`` maximises ``y . xi`` over ``K*`` restricted to
    ``span(c_F, free axes)``.  Computed for the face whose first nonzero sign is
    positive and negated for its opposite, so the map is odd.
    """
    F = tuple(F)
    if next(s for s in F if s != 0) < 0:
        return contact_pair(K, tuple(-s for s in F), K_star).negated()
    n = K.dim
    exact = K.backend == "exact"
    one = Fraction(1) if exact else 1.0
    c = tuple(one * s for s in F)
    cs = tuple(one * x for x in dual_center(F)) if exact else tuple(float(x) for x in dual_center(F))
    zero_vec = tuple(one * 0 for _ in range(n))
    if face_dim(F) == n - 1:
        return ContactPair(F, c, cs, one, zero_vec, zero_vec)
    if K_star is None:
        K_star = HPolytope(n, K.vertices, K.backend)
    sup = support(F)
    W = None if len(sup) == n else [_unit(n, i, one) for i in sup]
    y, _ = maximize_linear(K, c, W)
    Ws = [c] + [_unit(n, j, one) for j in free_coords(F)]
    y_star, value = maximize_linear(K_star, y, Ws)
    if not la.is_zero(value - 1):
        raise ContactError(f"dual section optimum {value} != 1 at face {F}")
    k = len(sup)
    alpha = la.dot(y, c) / k
    h = la.sub(y, la.scale(alpha, c))
    h_star = la.sub(y_star, la.scale(1 / alpha, cs))
    pair = ContactPair(F, y, y_star, alpha, h, h_star)
    bad = pair.violations()
    if bad:
        raise ContactError(f"contact pair at {F}: {', '.join(bad)}")
    return pair


def contact_pairs(K: VPolytope) -> dict:
    from .flags import enumerate_faces
    K_star = HPolytope(K.dim, K.vertices, K.backend)
    out = {}
    for F in enumerate_faces(K.dim):
        if F in out:
            continue
        out[F] = contact_pair(K, F, K_star)
    return out


# --- orthogonality relations ------------------------------------------------------

def _same_span(U, V) -> bool:
    U, V = list(U), list(V)
    ru = la.rank(U) if U else 0
    rv = la.rank(V) if V else 0
    return ru == rv and (la.rank(U + V) if U + V else 0) == ru


def _orth(U, n):
    if not U:
        return [_unit(n, i, Fraction(1)) for i in range(n)]
    return la.nullspace(U, n)


def orthogonality_certificates(F: CubeFace) -> dict:
    """Check the five relations between ``F``, ``F*`` and ``A`` exactly."""
    n = len(F)
    one = Fraction(1)
    x = tuple(one * s for s in F)
    xs = dual_center(F)
    A = build_operator_A(x, xs)
    Ainv = la.inverse([list(r) for r in A.matrix])
    lF = [_unit(n, j, one) for j in free_coords(F)]
    sup = support(F)
    lFs = []
    for j in sup[1:]:
        v = [one * 0] * n
        v[sup[0]] = one * F[sup[0]]
        v[j] = -one * F[j]
        lFs.append(tuple(v))
    A_lF = [la.matvec(A.matrix, v) for v in lF]
    Ainv_lFs = [la.matvec(Ainv, v) for v in lFs]
    orth = lambda U, V: all(la.is_zero(la.dot(u, v)) for u in U for v in V)

    r4a = _same_span(_orth(Ainv_lFs, n), [xs] + A_lF)
    r4b = _same_span(_orth(A_lF, n), [x] + Ainv_lFs)
    dim_ok = la.rank([xs] + A_lF) == 1 + face_dim(F)
    B = [x] + Ainv_lFs
    coeffs = la.nullspace([[la.dot(xs, b) for b in B]], len(B))
    inter = [tuple(sum(cf[i] * B[i][j] for i in range(len(B))) for j in range(n)) for cf in coeffs]
    r5 = _same_span(inter, Ainv_lFs)
    return {
        "x_perp_lFstar": orth([x], lFs),
        "xstar_perp_lF": orth([xs], lF),
        "lF_perp_lFstar": orth(lF, lFs),
        "relation4": r4a and r4b and dim_ok,
        "relation5": r5,
    }
