"""Vertex enumeration for ``{x : a_i . x <= 1}``.

Two independent routes: the double description method on the homogenized
cone (used everywhere) and exhaustive solving of n-subsets of constraints
(kept as a cross-check and for the small cases where it is cheap).
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import comb

from . import linalg as la

SUBSET_LIMIT = 200_000


class UnboundedError(ValueError):
    """The constraint normals do not positively span the space."""

    def __init__(self, message: str, direction=None):
        super().__init__(message)
        self.direction = direction


def _normalize(z):
    t = z[-1]
    if isinstance(t, Fraction):
        if t != 0:
            return tuple(x / t for x in z)
        m = max(abs(x) for x in z)
        return tuple(x / m for x in z)
    m = max(abs(x) for x in z)
    return tuple(x / m for x in z)


def _initial_rows(rows, d):
    chosen = []
    for i, r in enumerate(rows):
        if la.rank([rows[j] for j in chosen] + [r]) > len(chosen):
            chosen.append(i)
            if len(chosen) == d:
                break
    return chosen


def dd_vertices(normals, dim: int):
    """Return ``(vertices, tight)`` where ``tight[k]`` is the frozenset of
    constraint indices active at ``vertices[k]``.

    Raises :class:`UnboundedError` if the polyhedron has a recession
    direction.
    """
    if not normals:
        raise UnboundedError("no constraints")
    exact = isinstance(normals[0][0], Fraction) or isinstance(normals[0][0], int)
    one = Fraction(1) if exact else 1.0
    zero = one * 0
    d = dim + 1
    m = len(normals)
    # row m encodes t >= 0
    rows = [tuple(a) + (-one,) for a in normals]
    rows.append(tuple([zero] * dim) + (-one,))

    order = [m] + list(range(m))
    init = _initial_rows([rows[i] for i in order], d)
    init = [order[i] for i in init]
    if len(init) < d:
        ns = la.nullspace([normals[i] for i in range(m)], dim)
        raise UnboundedError("constraints do not span; polyhedron is unbounded",
                             direction=ns[0] if ns else None)
    inv = la.inverse([rows[i] for i in init])
    rays = []
    for k in range(d):
        z = _normalize(tuple(-inv[r][k] for r in range(d)))
        rays.append(z)

    processed = list(init)

    def zero_set(z, idx):
        return frozenset(i for i in idx if la.is_zero(la.dot(rows[i], z)))

    zsets = [zero_set(z, processed) for z in rays]

    for i in range(m + 1):
        if i in init:
            continue
        r = rows[i]
        vals = [la.dot(r, z) for z in rays]
        pos = [k for k, v in enumerate(vals) if not la.is_zero(v) and v > 0]
        neg = [k for k, v in enumerate(vals) if not la.is_zero(v) and v < 0]
        zer = [k for k, v in enumerate(vals) if la.is_zero(v)]
        new_rays = [rays[k] for k in neg] + [rays[k] for k in zer]
        new_z = [zsets[k] for k in neg] + [zsets[k] | {i} for k in zer]
        all_z = zsets
        for p in pos:
            for q in neg:
                common = zsets[p] & zsets[q]
                if len(common) < d - 2:
                    continue
                adjacent = True
                for k in range(len(rays)):
                    if k != p and k != q and common <= all_z[k]:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                vp, vq = vals[p], vals[q]
                z = tuple(vp * b - vq * a for a, b in zip(rays[p], rays[q]))
                z = _normalize(z)
                new_rays.append(z)
                new_z.append(common | {i})
        rays, zsets = new_rays, new_z
        processed.append(i)

    vertices, tight = [], []
    for z, zs in zip(rays, zsets):
        if la.is_zero(z[-1]):
            raise UnboundedError("polyhedron is unbounded", direction=z[:-1])
        v = tuple(x / z[-1] for x in z[:-1])
        vertices.append(v)
        if exact:
            # combined rays vanish on a processed row only when both parents do,
            # so the zero sets are already exact
            tight.append(zs - {m})
        else:
            tight.append(frozenset(j for j in range(m)
                                   if la.is_zero(la.dot(normals[j], v) - one)))
    return _dedupe(vertices, tight)


def _dedupe(vertices, tight):
    out_v, out_t = [], []
    for v, t in zip(vertices, tight):
        dup = False
        for k, w in enumerate(out_v):
            if all(la.is_zero(a - b) for a, b in zip(v, w)):
                out_t[k] = out_t[k] | t
                dup = True
                break
        if not dup:
            out_v.append(v)
            out_t.append(t)
    return out_v, out_t


def subset_vertices(normals, dim: int, limit: int = SUBSET_LIMIT):
    """Exhaustive route: solve every n-subset of constraints as equalities."""
    m = len(normals)
    if comb(m, dim) > limit:
        raise ValueError(f"C({m},{dim}) = {comb(m, dim)} subsets exceeds limit {limit}")
    exact = isinstance(normals[0][0], (Fraction, int))
    one = Fraction(1) if exact else 1.0
    if la.rank(normals) < dim:
        raise UnboundedError("constraints do not span; polyhedron is unbounded")
    verts = []
    for sub in combinations(range(m), dim):
        x = la.solve([normals[i] for i in sub], [one] * dim)
        if x is None:
            continue
        if all(la.leq(la.dot(a, x), one) for a in normals):
            verts.append(x)
    tight = [frozenset(j for j in range(m) if la.is_zero(la.dot(normals[j], v) - one))
             for v in verts]
    # boundedness is not checked here beyond the rank test
    return _dedupe(verts, tight)
