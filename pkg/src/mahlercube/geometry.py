"""Polytopes with the origin in the interior, polar duality and volumes.

Two scalar backends share one code path: ``exact`` keeps every coordinate a
:class:`fractions.Fraction`; ``float`` uses binary floats with the absolute
tolerance :data:`mahlercube.linalg.EPS`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from . import _dd, _kernels
from . import linalg as la
from .linalg import BackendError, Number

MAX_DIM = 8


class GeometryError(ValueError):
    """A polytope violates a representation precondition."""


def _coerce(points, backend: str | None):
    pts = [tuple(p) for p in points]
    flat = [x for p in pts for x in p]
    found = la.backend_of(flat)
    if backend is None:
        backend = found
    elif flat and found != backend:
        raise BackendError(f"{found} coordinates given to a {backend} polytope")
    if backend == "exact":
        pts = [tuple(Fraction(x) for x in p) for p in pts]
    else:
        pts = [tuple(float(x) for x in p) for p in pts]
    return pts, backend


def _facets_of_points(points):
    """Offset-1 facet normals of ``conv(points)`` and the point indices on each.

    Exact input goes through the double description method.  Float input goes
    through qhull, which merges nearly coplanar facets that an absolute
    tolerance would split into overlapping pieces.
    """
    exact = not isinstance(points[0][0], float)
    dim = len(points[0])
    if exact or dim == 1:
        return _dd.dd_vertices(list(points), dim)
    arr = np.array(points, dtype=float)
    try:
        hull = ConvexHull(arr)
    except QhullError as exc:
        raise _dd.UnboundedError(f"degenerate point set: {str(exc).splitlines()[0]}") from None
    eq = hull.equations  # unit normal u with u . x + off <= 0
    dist = -eq[:, -1]
    if dist.min() <= la.EPS:
        k = int(dist.argmin())
        raise _dd.UnboundedError("origin is not interior", direction=tuple(eq[k, :-1]))
    normals = []
    for a in eq[:, :-1] / dist[:, None]:
        if not any(np.abs(a - b).max() <= la.EPS for b in normals):
            normals.append(a)
    vals = arr @ np.array(normals).T
    tight = [frozenset(np.flatnonzero(np.abs(vals[:, k] - 1) <= la.EPS).tolist())
             for k in range(len(normals))]
    return [tuple(float(x) for x in a) for a in normals], tight


def _one(backend: str):
    return Fraction(1) if backend == "exact" else 1.0


@dataclass(frozen=True, eq=False)
class VPolytope:
    """Convex hull of ``vertices``; irredundant when built via :func:`convex_hull`."""

    dim: int
    vertices: tuple
    backend: str | None = None  # inferred from the coordinates
    symmetric: bool = False

    def __post_init__(self):
        if not 1 <= self.dim <= MAX_DIM:
            raise GeometryError(f"dimension {self.dim} outside 1..{MAX_DIM}")
        pts, backend = _coerce(self.vertices, self.backend)
        if any(len(p) != self.dim for p in pts):
            raise GeometryError("vertex length does not match dim")
        object.__setattr__(self, "vertices", tuple(pts))
        object.__setattr__(self, "backend", backend)
        if self.symmetric:
            vs = set(pts) if backend == "exact" else None
            for p in pts:
                q = tuple(-x for x in p)
                if vs is not None and q not in vs:
                    raise GeometryError(f"symmetric flag set but -{p} is missing")

    @cached_property
    def _facets(self):
        """(normals, tight) of the facets; normals in offset-1 form."""
        try:
            normals, tight = _facets_of_points(self.vertices)
        except _dd.UnboundedError as exc:
            d = exc.direction
            raise GeometryError(
                "origin is not interior: every vertex satisfies "
                f"{_fmt(d)} . x <= 0" if d is not None else str(exc)) from None
        # tight[k] lists vertex indices on facet k
        return normals, tight

    @property
    def facet_normals(self) -> list:
        return self._facets[0]

    @property
    def facet_vertex_sets(self) -> list:
        return self._facets[1]

    def scaled(self, t) -> "VPolytope":
        return VPolytope(self.dim, tuple(la.scale(t, v) for v in self.vertices),
                         self.backend, self.symmetric)

    def mapped(self, m) -> "VPolytope":
        return VPolytope(self.dim, tuple(la.matvec(m, v) for v in self.vertices),
                         self.backend, self.symmetric)

    def to_float(self) -> "VPolytope":
        return VPolytope(self.dim, tuple(tuple(float(x) for x in v) for v in self.vertices),
                         "float", self.symmetric)

    def vertex_set(self) -> frozenset:
        return frozenset(self.vertices)


@dataclass(frozen=True, eq=False)
class HPolytope:
    """``{x : a . x <= 1 for a in halfspaces}``."""

    dim: int
    halfspaces: tuple
    backend: str | None = None

    def __post_init__(self):
        pts, backend = _coerce(self.halfspaces, self.backend)
        if any(len(p) != self.dim for p in pts):
            raise GeometryError("halfspace length does not match dim")
        object.__setattr__(self, "halfspaces", tuple(pts))
        object.__setattr__(self, "backend", backend)

    @cached_property
    def _vertices(self):
        try:
            # the vertices of {a . x <= 1} are the facet normals of conv(a)
            return _facets_of_points(self.halfspaces)
        except _dd.UnboundedError as exc:
            raise GeometryError(f"halfspace system is unbounded: {exc}") from None

    def irredundant(self) -> "HPolytope":
        verts, tight = self._vertices
        keep = []
        for j, a in enumerate(self.halfspaces):
            on = [verts[k] for k, t in enumerate(tight) if j in t]
            if len(on) >= self.dim and la.rank(on) == self.dim:
                if not any(all(la.is_zero(x - y) for x, y in zip(a, b)) for b in keep):
                    keep.append(a)
        return HPolytope(self.dim, tuple(keep), self.backend)


@dataclass(frozen=True)
class LinearMap:
    matrix: tuple

    @property
    def dim(self) -> int:
        return len(self.matrix)

    def det(self):
        return la.det(self.matrix)

    def inverse(self) -> "LinearMap":
        inv = la.inverse(self.matrix)
        if inv is None:
            raise GeometryError("linear map is singular")
        return LinearMap(tuple(tuple(r) for r in inv))

    def apply(self, v) -> tuple:
        return la.matvec(self.matrix, v)


def _fmt(v) -> str:
    return "(" + ", ".join(str(x) for x in v) + ")"


# --- constructors -----------------------------------------------------------

def convex_hull(points, backend: str | None = None, symmetric: bool | None = None) -> VPolytope:
    """Irredundant V-representation of ``conv(points)``; origin must be interior."""
    pts, backend = _coerce(points, backend)
    if not pts:
        raise GeometryError("empty point set")
    dim = len(pts[0])
    raw = VPolytope(dim, tuple(pts), backend)
    normals = raw.facet_normals
    keep = []
    for p in pts:
        tight = [a for a in normals if la.is_zero(la.dot(a, p) - _one(backend))]
        if len(tight) >= dim and la.rank(tight) == dim:
            if not any(all(la.is_zero(x - y) for x, y in zip(p, q)) for q in keep):
                keep.append(p)
    keep.sort()
    if symmetric is None:
        symmetric = _is_symmetric(keep)
    return VPolytope(dim, tuple(keep), backend, symmetric)


def _is_symmetric(pts) -> bool:
    for p in pts:
        q = tuple(-x for x in p)
        if not any(all(la.is_zero(x - y) for x, y in zip(q, r)) for r in pts):
            return False
    return True


def cube(n: int, backend: str = "exact") -> VPolytope:
    one = _one(backend)
    verts = [tuple(one if (k >> i) & 1 else -one for i in range(n)) for k in range(2 ** n)]
    return VPolytope(n, tuple(sorted(verts)), backend, True)


def cross_polytope(n: int, backend: str = "exact") -> VPolytope:
    one = _one(backend)
    verts = []
    for i in range(n):
        for s in (one, -one):
            v = [one * 0] * n
            v[i] = s
            verts.append(tuple(v))
    return VPolytope(n, tuple(sorted(verts)), backend, True)


# --- duality ----------------------------------------------------------------

def polar_h(K: VPolytope) -> HPolytope:
    """``K* = {xi : v . xi <= 1}`` over the vertices ``v`` of ``K``."""
    K.facet_normals  # raises GeometryError if 0 is not interior
    return HPolytope(K.dim, K.vertices, K.backend)


def vertices_from_halfspaces(H: HPolytope, method: str = "dd") -> VPolytope:
    if method == "dd":
        verts, _ = H._vertices
    elif method == "subsets":
        verts, _ = _dd.subset_vertices(list(H.halfspaces), H.dim)
    else:
        raise ValueError(f"unknown method {method!r}")
    verts = sorted(verts)
    return VPolytope(H.dim, tuple(verts), H.backend, _is_symmetric(verts))


def halfspaces_from_vertices(K: VPolytope) -> HPolytope:
    return HPolytope(K.dim, tuple(sorted(K.facet_normals)), K.backend)


def polar(K: VPolytope) -> VPolytope:
    """V-representation of the polar body."""
    verts = sorted(K.facet_normals)
    return VPolytope(K.dim, tuple(verts), K.backend, K.symmetric)


# --- volume -----------------------------------------------------------------

def _triangulate(face: frozenset, k: int, facet_sets, memo) -> list:
    """Pulling triangulation of the k-face spanned by vertex indices ``face``."""
    key = face
    if key in memo:
        return memo[key]
    if k == 0:
        (v,) = face
        out = [(v,)]
    else:
        pivot = min(face)
        cands = set()
        for s in facet_sets:
            g = face & s
            if g and g != face:
                cands.add(g)
        maximal = [g for g in cands if not any(g < h for h in cands)]
        out = []
        for g in maximal:
            if pivot in g:
                continue
            for simplex in _triangulate(g, k - 1, facet_sets, memo):
                out.append((pivot,) + simplex)
    memo[key] = out
    return out


def cone_simplices(K: VPolytope) -> list:
    """Simplices (as vertex-index tuples) whose cones from 0 tile ``K``."""
    sets = [frozenset(s) for s in K.facet_vertex_sets]
    memo: dict = {}
    out = []
    for s in sets:
        out.extend(_triangulate(s, K.dim - 1, sets, memo))
    return out


def volume(K: VPolytope | HPolytope) -> Number:
    if isinstance(K, HPolytope):
        K = vertices_from_halfspaces(K)
    verts = K.vertices
    if K.backend == "float":
        # nearly coplanar facets make float tight sets overlap; qhull merges them
        try:
            return float(ConvexHull(np.array(verts, dtype=float)).volume)
        except QhullError as exc:
            raise GeometryError(f"degenerate polytope: {exc}") from None
    total = _one(K.backend) * 0
    for simplex in cone_simplices(K):
        total += abs(la.det([verts[i] for i in simplex]))
    return total / math.factorial(K.dim)


def facet_volumes(K: VPolytope) -> list:
    """(distance from 0, (n-1)-volume) of each facet, as floats unless both are
    rational squares."""
    verts = K.vertices
    sets = [frozenset(s) for s in K.facet_vertex_sets]
    memo: dict = {}
    out = []
    for a, s in zip(K.facet_normals, sets):
        cone = _one(K.backend) * 0
        for simplex in _triangulate(s, K.dim - 1, sets, memo):
            cone += abs(la.det([verts[i] for i in simplex]))
        cone /= math.factorial(K.dim)
        norm = _sqrt(la.norm2_sq(a))
        dist = 1 / norm
        # cone volume = dist * area / n
        out.append((dist, K.dim * cone * norm))
    return out


def _sqrt(q):
    if isinstance(q, Fraction):
        num, den = q.numerator, q.denominator
        rn, rd = math.isqrt(num), math.isqrt(den)
        if rn * rn == num and rd * rd == den:
            return Fraction(rn, rd)
        return math.sqrt(q)
    return math.sqrt(q)


def volume_product(K: VPolytope) -> Number:
    return volume(K) * volume(polar(K))


def cube_volume_product(n: int, backend: str = "exact") -> Number:
    return volume_product(cube(n, backend))


# --- containment and scaling --------------------------------------------------

def max_scaled_cube(K: VPolytope | HPolytope) -> Number:
    """Largest ``t`` with ``t * B_inf^n`` inside ``K``."""
    normals = K.halfspaces if isinstance(K, HPolytope) else K.facet_normals
    return min(1 / la.norm1(a) for a in normals)


def _normals_of(K) -> list:
    return list(K.halfspaces) if isinstance(K, HPolytope) else list(K.facet_normals)


def contains(K: VPolytope | HPolytope, L, scale=1) -> bool:
    """True iff every vertex of ``L`` (a polytope or a point list) is in ``scale*K``."""
    pts = L.vertices if isinstance(L, VPolytope) else list(L)
    normals = _normals_of(K)
    backend = K.backend
    if backend == "float":
        return _kernels.max_violation(np.array(normals), np.array(pts, dtype=float),
                                      float(scale)) <= la.EPS
    la.backend_of([x for p in pts for x in p])
    return all(la.dot(a, p) <= scale for a in normals for p in pts)


def gauge(K: VPolytope | HPolytope, x) -> Number:
    """Minkowski functional: smallest ``s`` with ``x`` in ``s*K``."""
    return max(la.dot(a, x) for a in _normals_of(K))


# --- linear optimisation over sections ---------------------------------------

def maximize_linear(K: VPolytope | HPolytope, c, W=None):
    """Maximise ``c . x`` over ``K`` intersected with ``span(W)``.

    Returns ``(point, value)``.  Ties go to the lexicographically smallest
    vertex of the optimal face of the section.
    """
    n = K.dim
    if isinstance(K, VPolytope) and W is None:
        cands = list(K.vertices)
    else:
        normals = _normals_of(K)
        if W is None:
            cands = list(HPolytope(n, tuple(normals), K.backend)._vertices[0])
        else:
            W = [tuple(w) for w in W]
            k = len(W)
            if la.rank(W) != k:
                raise GeometryError("section basis is linearly dependent")
            rows = []
            for a in normals:
                r = tuple(la.dot(a, w) for w in W)
                if not all(la.is_zero(x) for x in r):
                    rows.append(r)
            if k == 1:
                hi = min(1 / r[0] for r in rows if r[0] > 0)
                lo = max(1 / r[0] for r in rows if r[0] < 0)
                us = [(hi,), (lo,)]
            else:
                us, _ = _dd.dd_vertices(rows, k)
            zero = _one(K.backend) * 0
            cands = [tuple(sum((u[i] * W[i][j] for i in range(k)), zero) for j in range(n))
                     for u in us]
    vals = [la.dot(c, p) for p in cands]
    best = max(vals)
    opt = [p for p, v in zip(cands, vals) if la.is_zero(v - best)]
    point = min(opt)
    return point, la.dot(c, point)


# --- cone over a polytope ----------------------------------------------------

def cone_volume_bound(P: VPolytope, x, delta):
    """Volume of ``conv(P, x)`` against ``vol(P) + delta * r * A / n``.

    ``A`` is the smallest facet area of ``P`` and ``r`` the smallest distance
    from the origin to a facet hyperplane.  ``x`` must not lie in the interior
    of ``(1 + delta) P``.
    """
    one = _one(P.backend)
    if la.backend_of(list(x) + [delta]) != P.backend:
        raise BackendError("point/delta backend differs from polytope")
    if gauge(P, x) < one + delta and not la.is_zero(gauge(P, x) - one - delta):
        raise GeometryError("x lies inside (1 + delta) P; hypothesis violated")
    fv = facet_volumes(P)
    r = min(d for d, _ in fv)
    A = min(a for _, a in fv)
    hull = convex_hull(list(P.vertices) + [tuple(x)], P.backend)
    lhs = volume(hull)
    rhs = volume(P) + delta * r * A / P.dim
    return lhs, rhs
