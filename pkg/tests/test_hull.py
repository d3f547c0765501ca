import math

import numpy as np
import pytest
from scipy.spatial.distance import pdist

from app.geometry.hull import diameter, farthest_pair, rotating_calipers


def test_empty_and_single():
    assert farthest_pair(np.empty((0, 2))) == (0.0, None, None)
    d, p, q = farthest_pair(np.array([[1.0, 2.0]]))
    assert d == 0.0
    assert np.array_equal(p, q)


def test_square_with_interior_points():
    pts = np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5], [0.2, 0.7]], dtype=float)
    d, p, q = farthest_pair(pts)
    assert d == pytest.approx(math.sqrt(2.0))
    assert math.hypot(*(p - q)) == pytest.approx(d)


def test_matches_brute_force_on_large_sets(rng):
    for _ in range(10):
        pts = rng.normal(size=(300, 2))
        assert diameter(pts) == pytest.approx(pdist(pts).max(), rel=1e-12)


def test_collinear_points():
    xs = np.linspace(-2.0, 3.0, 200)
    pts = np.column_stack([xs, 0.5 * xs])
    assert diameter(pts) == pytest.approx(math.hypot(5.0, 2.5))


def test_rotating_calipers_regular_polygon():
    angles = 2.0 * math.pi * np.arange(100) / 100
    polygon = np.column_stack([np.cos(angles), np.sin(angles)])
    d, i, j = rotating_calipers(polygon)
    assert d == pytest.approx(2.0)
    assert abs(i - j) == 50
