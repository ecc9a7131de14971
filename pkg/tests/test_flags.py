from fractions import Fraction
from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mahlercube.flags import (AlphaWeights, Flag, FlagPoints, base_dual_points, base_points,
                              build_Q_pair, cube_mahler, dual_center, enumerate_faces,
                              enumerate_flags, face_contains, face_dim, flag_orientation,
                              flag_simplex_signed_volume, g_volume, lemma7_gap,
                              per_flag_volumes)
from mahlercube.geometry import convex_hull, cross_polytope, cube, volume
from mahlercube.linalg import matvec

F = Fraction


@pytest.mark.parametrize("n,count", [(1, 2), (2, 8), (3, 26), (4, 80)])
def test_face_counts(n, count):
    assert len(enumerate_faces(n)) == count == 3 ** n - 1


def test_faces_by_dimension_in_three_dimensions():
    dims = [face_dim(F) for F in enumerate_faces(3)]
    assert [dims.count(k) for k in range(3)] == [8, 12, 6]


@pytest.mark.parametrize("n", range(1, 7))
def test_flag_count(n):
    flags = enumerate_flags(n)
    assert len(flags) == 2 ** n * factorial(n)
    assert len(set(flags)) == len(flags)


def test_flag_faces_form_a_chain():
    for fl in enumerate_flags(3):
        fs = fl.faces()
        assert [face_dim(G) for G in fs] == [0, 1, 2]
        assert all(face_contains(fs[k + 1], fs[k]) for k in range(2))


def test_too_large_dimension_rejected():
    with pytest.raises(ValueError):
        enumerate_faces(9)


def test_dual_centers():
    assert dual_center((1, 0, 0)) == (1, 0, 0)
    assert dual_center((1, 1, 1)) == (F(1, 3),) * 3
    assert dual_center((1, -1)) == (F(1, 2), F(-1, 2))


def test_flag_volumes_at_base():
    X = base_points(2)
    assert flag_simplex_signed_volume(X, Flag((1, 1), (1, 0))) == F(1, 2)
    X3 = base_points(3)
    assert all(flag_simplex_signed_volume(X3, fl) == F(1, 6) for fl in enumerate_flags(3))


def test_zero_vertex_point_gives_zero_volume():
    X = base_points(3)
    fl = enumerate_flags(3)[5]
    X = FlagPoints(3, {**X, fl.faces()[0]: (F(0),) * 3})
    assert flag_simplex_signed_volume(X, fl) == 0


def test_orientation_is_a_sign():
    assert {flag_orientation(fl) for fl in enumerate_flags(3)} == {-1, 1}


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_tiling_sums(n):
    assert g_volume(base_points(n)) == 2 ** n
    assert g_volume(base_dual_points(n)) == F(2 ** n, factorial(n))
    if n <= 4:
        assert g_volume(base_points(n)) == volume(cube(n))
        assert g_volume(base_dual_points(n)) == volume(cross_polytope(n))


def test_float_g_matches_exact():
    rng = np.random.default_rng(3)
    X = base_points(3)
    pts = {G: tuple(x + F(int(rng.integers(-5, 6)), 200) for x in p) for G, p in X.items()}
    exact = g_volume(FlagPoints(3, pts))
    flt = g_volume(FlagPoints(3, {G: tuple(float(x) for x in p) for G, p in pts.items()}))
    assert abs(flt - float(exact)) < 1e-12


def test_reflection_through_free_coordinate_keeps_g():
    """Moving x_F by +t e_j or -t e_j (j free in F) gives the same volume."""
    n = 3
    X = base_points(n)
    for G in enumerate_faces(n):
        for j in range(n):
            if G[j] != 0:
                continue
            for t in (F(1, 7), F(3, 10)):
                e = tuple(F(int(k == j)) for k in range(n))
                assert g_volume(X.shifted({G: e}, t)) == g_volume(X.shifted({G: e}, -t))


# --- Q pair and the product inequality ---------------------------------------------

def test_q_pair_at_constant_weights():
    Q, Qp = build_Q_pair(AlphaWeights.constant(3))
    assert Q == base_points(3) and Qp == base_dual_points(3)
    Q2, Qp2 = build_Q_pair(AlphaWeights.constant(2, F(2)))
    for G in enumerate_faces(2):
        assert Q2[G] == tuple(2 * s for s in G)
        assert Qp2[G] == tuple(x / 2 for x in dual_center(G))


def test_weights_must_be_positive():
    w = dict(AlphaWeights.constant(2))
    w[(1, 1)] = F(0)
    with pytest.raises(ValueError):
        AlphaWeights(2, w)


def _random_weights(rng, n):
    return AlphaWeights(n, {G: F(int(rng.integers(1, 1001)), int(rng.integers(1, 1001)))
                            for G in enumerate_faces(n)})


@pytest.mark.parametrize("n", [2, 3])
def test_per_flag_products_do_not_depend_on_the_flag(n):
    rng = np.random.default_rng(7 + n)
    N = 2 ** n * factorial(n)
    expected = F(2 ** n, N) * F(2 ** n, factorial(n) * N)
    for _ in range(10):
        Q, Qp = build_Q_pair(_random_weights(rng, n))
        prods = {a * b for a, b in zip(per_flag_volumes(Q), per_flag_volumes(Qp))}
        assert prods == {expected}


def test_cube_mahler_value():
    assert [cube_mahler(n) for n in (2, 3, 4)] == [8, F(32, 3), F(32, 3)]


@pytest.mark.parametrize("n", [2, 3])
def test_gap_zero_at_constant_weights(n):
    for c in (F(1), F(5, 2), F(1, 9)):
        assert lemma7_gap(AlphaWeights.constant(n, c)) == 0


def test_gap_with_dimension_weights():
    # every flag sees the same weights, so the per-flag vectors are proportional
    assert lemma7_gap(AlphaWeights.by_dimension(2, [F(2), F(1)])) == 0
    assert lemma7_gap(AlphaWeights.by_dimension(3, [F(3), F(1, 2), F(7)])) == 0


def test_gap_positive_when_weights_differ_between_flags():
    w = dict(AlphaWeights.constant(2))
    w[(1, 1)] = w[(-1, -1)] = F(2)
    assert lemma7_gap(AlphaWeights(2, w)) > 0


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 32 - 1), st.sampled_from([2, 3]))
def test_gap_nonnegative(seed, n):
    assert lemma7_gap(_random_weights(np.random.default_rng(seed), n)) >= 0


# --- agreement with the convex hull --------------------------------------------------

def _union_is_convex(X, hull):
    for fl in enumerate_flags(X.dim):
        pts = [X[G] for G in fl.faces()]
        if not any(all(sum(a * x for a, x in zip(nrm, p)) == 1 for p in pts)
                   for nrm in hull.facet_normals):
            return False
    return True


@pytest.mark.parametrize("n", [2, 3])
def test_g_equals_hull_volume_under_linear_maps(n):
    rng = np.random.default_rng(n)
    for _ in range(4):
        T = [[F(int(i == j)) + F(int(rng.integers(-2, 3)), 100) for j in range(n)]
             for i in range(n)]
        X = FlagPoints(n, {G: matvec(T, p) for G, p in base_points(n).items()})
        hull = convex_hull(list(X.values()))
        assert _union_is_convex(X, hull)
        assert g_volume(X) == volume(hull)


@pytest.mark.parametrize("n", [2, 3])
def test_g_against_hull_for_small_perturbations(n):
    """Within radius 0.05 the flag simplices still tile a star-shaped region:
    ``g`` is its volume, equal to the hull's exactly when the union is convex."""
    rng = np.random.default_rng(40 + n)
    equal = 0
    for _ in range(12):
        pts = {G: tuple(x + F(int(rng.integers(-2, 3)), 100) for x in p)
               for G, p in base_points(n).items()}
        X = FlagPoints(n, pts)
        hull = convex_hull(list(X.values()))
        g, v = g_volume(X), volume(hull)
        if _union_is_convex(X, hull):
            assert g == v
            equal += 1
        else:
            assert 0 < g < v
    X = base_points(n)
    assert g_volume(X) == volume(convex_hull(list(X.values())))
