"""Shared helpers: random symmetric rational polytopes and invertible maps."""

from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from mahlercube.geometry import convex_hull


def random_symmetric_polytope(rng, n, k=None, denom=8):
    """Hull of +-p for random rational p, padded with the cube's vertex
    directions scaled to keep the origin interior."""
    k = k or int(rng.integers(n, 2 * n + 2))
    pts = []
    for _ in range(k):
        p = tuple(Fraction(int(rng.integers(-denom, denom + 1)), denom) for _ in range(n))
        if any(p):
            pts.append(p)
    for i in range(n):
        e = [Fraction(0)] * n
        e[i] = Fraction(int(rng.integers(denom // 2, denom + 1)), denom)
        pts.append(tuple(e))
    pts += [tuple(-x for x in p) for p in pts]
    return convex_hull(pts, "exact", symmetric=True)


def random_invertible(rng, n, lo=-3, hi=3):
    while True:
        m = [[Fraction(int(rng.integers(lo, hi + 1)), int(rng.integers(1, 4))) for _ in range(n)]
             for _ in range(n)]
        if np.linalg.matrix_rank(np.array(m, dtype=float)) == n:
            return m


def sign_vectors(n):
    return list(product((-1, 1), repeat=n))


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
