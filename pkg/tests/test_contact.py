from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mahlercube.contact import (ContactError, bm_distance_upper_bound, build_operator_A,
                                canonicalize, canonicalize_with_map, contact_pair,
                                contact_pairs, facet_touch_certificate, minimal_parallelepiped,
                                orthogonality_certificates)
from mahlercube.experiments import TrialConfig, sample_body_near_cube
from mahlercube.flags import dual_center, enumerate_faces, face_dim, free_coords, support
from mahlercube.geometry import (HPolytope, contains, convex_hull, cross_polytope, cube,
                                 max_scaled_cube, vertices_from_halfspaces)
from mahlercube.linalg import det, dot, matvec

from conftest import random_invertible

F = Fraction


def corner_cut_square(t):
    """The square with the corners (1,1) and (-1,-1) cut by x + y <= 2 - t."""
    rows = [(F(1), F(0)), (F(-1), F(0)), (F(0), F(1)), (F(0), F(-1)),
            (1 / (2 - t), 1 / (2 - t)), (-1 / (2 - t), -1 / (2 - t))]
    return vertices_from_halfspaces(HPolytope(2, tuple(rows)))


# --- enclosing parallelepiped -----------------------------------------------------

@pytest.mark.parametrize("n", [2, 3])
def test_cube_is_its_own_parallelepiped(n):
    T = minimal_parallelepiped(cube(n))
    assert [list(r) for r in T.matrix] == [[int(i == j) for j in range(n)] for i in range(n)]


@pytest.mark.parametrize("n", [2, 3])
def test_linear_image_of_cube(n):
    rng = np.random.default_rng(n)
    for _ in range(3):
        S = random_invertible(rng, n)
        K = convex_hull([matvec(S, v) for v in cube(n).vertices], symmetric=True)
        T = minimal_parallelepiped(K)
        assert abs(T.det()) == abs(det(S))
        assert all(facet_touch_certificate(K, T))


def test_cross_polytope_parallelogram_has_area_two():
    T = minimal_parallelepiped(cross_polytope(2))
    assert 4 * abs(T.det()) == 2
    assert all(facet_touch_certificate(cross_polytope(2), T))


def test_parallelepiped_needs_symmetric_body():
    K = convex_hull([(F(1), F(0)), (F(0), F(1)), (F(-1), F(-1))])
    with pytest.raises(ValueError):
        minimal_parallelepiped(K)


def test_canonical_cube():
    for K in (cube(3), cube(3).scaled(F(9, 10))):
        Khat, delta = canonicalize(K)
        assert Khat.vertex_set() == cube(3).vertex_set()
        assert delta == 0
    assert bm_distance_upper_bound(cube(2)) == 1


def test_symmetrised_moved_vertex_is_a_parallelogram():
    # moving (1,1) to (1-t,1) and its opposite along keeps four vertices: a
    # parallelogram, which is a linear image of the square
    t = F(1, 100)
    K = convex_hull([(1 - t, F(1)), (t - 1, F(-1)), (F(1), F(-1)), (F(-1), F(1))], symmetric=True)
    Khat, delta, T = canonicalize_with_map(K)
    assert delta == 0
    assert Khat.vertex_set() == cube(2).vertex_set()


def test_canonical_corner_cut_square():
    t = F(1, 100)
    K = corner_cut_square(t)
    Khat, delta, T = canonicalize_with_map(K)
    assert 0 < delta <= 4 * 2 ** 2 * t
    assert all(facet_touch_certificate(K, T))
    for j in range(2):
        e = tuple(F(int(i == j)) for i in range(2))
        assert contains(Khat, [e]) and contains(Khat, [tuple(-x for x in e)])
        assert not contains(Khat, [e], F(99, 100))


def _sandwich_inputs(n, count, delta_max):
    out = []
    for gen in ("corner", "pull", "halfspace"):
        cfg = TrialConfig(n=n, delta_max=delta_max, generator=gen, seed=3)
        out += [sample_body_near_cube(cfg, i)[0] for i in range(count)]
    return out


@pytest.mark.parametrize("n", [2, 3])
def test_canonical_slack_within_four_n_squared(n):
    for K in _sandwich_inputs(n, 3, F(1, 100)):
        delta0 = 1 - max_scaled_cube(K)
        assert contains(K, cube(n).scaled(1 - delta0)) and contains(cube(n), K)
        _, delta, T = canonicalize_with_map(K)
        assert 0 <= delta <= 4 * n * n * delta0
        assert all(facet_touch_certificate(K, T))


def test_bm_bound_linear_in_slack():
    ratios = []
    for k in range(4, 10):
        t = F(1, 2 ** k)
        b = bm_distance_upper_bound(corner_cut_square(t))
        assert b >= 1
        ratios.append((b - 1) / t)
    assert max(ratios) <= 1


# --- the operator A ---------------------------------------------------------------

def test_operator_identity():
    e1 = (F(1), F(0), F(0))
    A = build_operator_A(e1, e1)
    assert [list(r) for r in A.matrix] == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    assert A.b_squared == 0 and A.a_prime == 1


def test_operator_plane_example():
    A = build_operator_A((F(2), F(0)), (F(1, 2), F(1)))
    assert [list(r) for r in A.matrix] == [[F(1, 4), F(1, 2)], [F(1, 2), 5]]
    assert A.a == F(1, 4) and A.b == F(1, 2) and A.a_prime == 5
    assert A.a * A.a_prime > A.b_squared


def test_operator_on_cube_faces_is_a_homothety():
    for G in enumerate_faces(3):
        c = tuple(F(s) for s in G)
        A = build_operator_A(c, dual_center(G))
        k = 3 - face_dim(G)
        assert A.apply(c) == tuple(x / k for x in c)
        assert A.b_squared == 0


def test_operator_rejects_bad_pairing():
    with pytest.raises(ValueError):
        build_operator_A((F(1), F(0)), (F(2), F(0)))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=9), min_size=3, max_size=3),
       st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=9), min_size=3, max_size=3))
def test_operator_is_spd_and_maps_x_to_x_star(x, v):
    x = tuple(x)
    if dot(x, x) == 0:
        return
    # shift v along x so that x . x_star = 1
    xs = tuple(vi + (1 - dot(x, v)) * xi / dot(x, x) for vi, xi in zip(v, x))
    A = build_operator_A(x, xs)
    assert A.apply(x) == xs
    assert A.is_self_adjoint() and A.is_positive_definite()


# --- contact pairs --------------------------------------------------------------

@pytest.mark.parametrize("n", [2, 3])
def test_contact_pairs_of_the_cube(n):
    for G, p in contact_pairs(cube(n)).items():
        assert p.y == tuple(F(s) for s in G)
        assert p.y_star == dual_center(G)
        assert p.alpha == 1
        assert not any(p.h) and not any(p.h_star)


def _canonical_bodies(n, count=2):
    out = []
    for K in _sandwich_inputs(n, count, F(1, 100)):
        Khat, delta = canonicalize(K)
        if delta > 0:
            out.append(Khat)
    return out


@pytest.mark.parametrize("n", [2, 3])
def test_contact_pair_properties(n):
    for K in _canonical_bodies(n):
        Kstar = HPolytope(n, K.vertices)
        pairs = contact_pairs(K)
        assert set(pairs) == set(enumerate_faces(n))
        for G, p in pairs.items():
            assert dot(p.y, p.y_star) == 1
            assert p.violations() == []
            # y on the boundary of K, y* on the boundary of K*
            assert max(dot(a, p.y) for a in K.facet_normals) == 1
            assert max(dot(v, p.y_star) for v in Kstar.halfspaces) == 1
            assert dot(p.h, G) == 0
            assert all(p.h[j] == 0 for j in free_coords(G))
            assert all(p.h_star[i] == 0 for i in support(G))
            neg = pairs[tuple(-s for s in G)]
            assert neg.y == tuple(-x for x in p.y) and neg.y_star == tuple(-x for x in p.y_star)


def test_contact_pair_float_close_to_exact():
    K = _canonical_bodies(2, 1)[0]
    Kf = K.to_float()
    for G in enumerate_faces(2):
        a, b = contact_pair(K, G), contact_pair(Kf, G)
        assert np.allclose(np.array(b.y), np.array(a.y, dtype=float), atol=1e-9)
        assert np.allclose(np.array(b.y_star), np.array(a.y_star, dtype=float), atol=1e-9)


def test_contact_slope_bounded_for_corner_cuts():
    slopes = []
    for k in range(5, 11):
        K, delta = canonicalize(corner_cut_square(F(1, 2 ** k)))
        pairs = contact_pairs(K)
        dev = max(float(sum((a - s) ** 2 for a, s in zip(p.y, G))) ** 0.5 for G, p in pairs.items())
        slopes.append(dev / float(delta))
    assert max(slopes) <= 2 * min(slopes)


def test_orthogonality_relations_all_faces():
    for n in (2, 3, 4):
        for G in enumerate_faces(n):
            cert = orthogonality_certificates(G)
            assert all(cert.values()), (G, cert)


def test_orthogonality_relations_on_an_edge():
    cert = orthogonality_certificates((1, 1, 0))
    assert cert == {"x_perp_lFstar": True, "xstar_perp_lF": True, "lF_perp_lFstar": True,
                    "relation4": True, "relation5": True}


def test_contact_error_is_a_runtime_error():
    assert issubclass(ContactError, RuntimeError)
