from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mahlercube.differential import (Perturbation, directional_derivative, finite_difference,
                                     first_order_coefficient, is_base_configuration,
                                     kernel_residual, loglog_slope, orthogonal_directions,
                                     second_order_gap)
from mahlercube.flags import FlagPoints, base_points, enumerate_faces, face_dim, g_volume

F = Fraction


def _to_float(X):
    return FlagPoints(X.dim, {G: tuple(float(x) for x in p) for G, p in X.items()})


def _random_kernel_direction(rng, n, exact=True):
    deltas = {}
    for G in enumerate_faces(n):
        basis = orthogonal_directions(G)
        if exact:
            c = [F(int(rng.integers(-9, 10)), 7) for _ in basis]
        else:
            c = [float(rng.normal()) for _ in basis]
        deltas[G] = tuple(sum(ci * d[j] for ci, d in zip(c, basis)) for j in range(n))
    return Perturbation(deltas)


def test_orthogonal_basis_shape():
    for n in (2, 3, 4):
        for G in enumerate_faces(n):
            basis = orthogonal_directions(G)
            k = n - face_dim(G)
            assert len(basis) == face_dim(G) + k * (k - 1) // 2
            assert all(sum(a * b for a, b in zip(d, G)) == 0 for d in basis)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("scales", [None, "mixed"])
def test_every_basis_direction_is_in_the_kernel(n, scales):
    a = None if scales is None else [F(3, 2), F(2, 3), F(5)][:n]
    X0 = base_points(n, a)
    for G in enumerate_faces(n):
        for d in orthogonal_directions(G):
            assert kernel_residual(X0, Perturbation({G: d})) == 0


@pytest.mark.parametrize("n", [2, 3])
def test_all_faces_at_once_is_in_the_kernel(n):
    rng = np.random.default_rng(n)
    for _ in range(5):
        assert kernel_residual(base_points(n), _random_kernel_direction(rng, n)) == 0


def test_zero_perturbation():
    assert kernel_residual(base_points(3), Perturbation({})) == 0


def test_radial_direction_is_not_in_the_kernel():
    for n in (2, 3):
        X0 = base_points(n)
        for G in enumerate_faces(n):
            c = tuple(F(s) for s in G)
            assert first_order_coefficient(X0, Perturbation({G: c})) > 0


def test_radial_derivative_matches_polynomial_in_the_plane():
    # moving the vertex (1,1) to (1+t, 1+t) grows both of its flag triangles
    # from area 1/2 to (1+t)/2, so g = 4 + t exactly
    X0 = base_points(2)
    d = Perturbation({(1, 1): (F(1), F(1))})
    assert first_order_coefficient(X0, d) == 1
    assert directional_derivative(X0, d, F(1, 10)) == 1
    assert g_volume(X0.shifted(d.deltas, F(1, 3))) == 4 + F(1, 3)


def test_non_orthogonal_direction_rejected():
    with pytest.raises(ValueError, match="not orthogonal"):
        kernel_residual(base_points(2), Perturbation({(1, 1): (F(1), F(0))}))


def test_non_base_configuration_rejected():
    X = base_points(2).shifted({(1, 0): (F(0), F(1, 3))})
    assert not is_base_configuration(X)
    with pytest.raises(ValueError):
        kernel_residual(X, Perturbation({(1, 1): (F(1), F(-1))}))


def test_float_kernel_residual_is_small():
    rng = np.random.default_rng(11)
    Xf = _to_float(base_points(3))
    d = _random_kernel_direction(rng, 3, exact=False)
    assert abs(kernel_residual(Xf, d)) < 1e-9


def test_first_order_float_matches_exact():
    rng = np.random.default_rng(12)
    X0 = base_points(3).shifted({(1, 1, 0): (F(1, 5), F(0), F(1, 9))})
    d = Perturbation({G: tuple(F(int(rng.integers(-4, 5)), 3) for _ in range(3))
                      for G in enumerate_faces(3)})
    exact = first_order_coefficient(X0, d)
    flt = first_order_coefficient(_to_float(X0), d)
    assert abs(flt - float(exact)) < 1e-10


@settings(max_examples=15, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 6), st.sampled_from([2, 3]))
def test_g_is_a_polynomial_of_degree_n(seed, n):
    rng = np.random.default_rng(seed)
    X0 = base_points(n).shifted({G: tuple(F(int(rng.integers(-3, 4)), 10) for _ in range(n))
                                 for G in enumerate_faces(n)})
    d = Perturbation({G: tuple(F(int(rng.integers(-5, 6)), 4) for _ in range(n))
                      for G in enumerate_faces(n)})
    assert finite_difference(X0, d, n + 1) == 0
    assert finite_difference(X0, d, n + 1, F(1, 3)) == 0


def test_central_difference_decays_quadratically():
    # single-face kernel directions make g at most quadratic along the line,
    # which the central difference cancels exactly; mixing all faces in three
    # dimensions leaves a cubic term and a visible h^2 error
    rng = np.random.default_rng(1)
    Xf = _to_float(base_points(3))
    d = _random_kernel_direction(rng, 3, exact=False)
    hs = [2.0 ** -k for k in range(3, 11)]
    vals = [directional_derivative(Xf, d, h) for h in hs]
    assert loglog_slope(hs, vals) >= 1.9
    K = max(abs(v) / h ** 2 for v, h in zip(vals, hs))
    assert all(abs(v) <= K * h ** 2 * (1 + 1e-6) for v, h in zip(vals, hs))


def test_single_face_central_difference_is_exact():
    X0 = base_points(3)
    d = Perturbation({(1, 1, 0): (F(0), F(0), F(1))})
    assert directional_derivative(X0, d, F(1, 4)) == 0


def test_second_order_gap():
    X0 = base_points(2)
    gap, dist = second_order_gap(X0, X0, X0)
    assert gap == 0 and dist == 0
    X1 = X0.shifted({(1, 1): (F(1, 10), F(-1, 10))})
    X2 = X0.shifted({(1, 0): (F(0), F(1, 5))})
    gap, dist = second_order_gap(X0, X1, X2)
    assert dist == F(1, 5)
    assert gap == abs(g_volume(X1) - g_volume(X2))


def test_loglog_slope_of_a_power_law():
    hs = [2.0 ** -k for k in range(2, 8)]
    assert loglog_slope(hs, [3 * h ** 3 for h in hs]) == pytest.approx(3)
