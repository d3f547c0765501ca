import math

import numpy as np
import pytest

from app.core.exceptions import CoincidentCircles
from app.geometry.geom_core import (
    circle_box_intersections,
    circle_circle_intersection,
    contains,
    dist,
    distance_matrix,
    pair_intersections,
)
from app.models.schemas import Box, Disk, Point


def disk(x, y, r):
    return Disk(center=Point(x=x, y=y), radius=r)


def test_dist_examples():
    assert dist(Point(x=0, y=0), Point(x=3, y=4)) == 5.0
    assert dist(Point(x=1, y=1), Point(x=1, y=1)) == 0.0
    assert dist(Point(x=0, y=0), Point(x=1, y=1)) == pytest.approx(math.sqrt(2.0), abs=1e-12)


def test_dist_triangle_inequality(rng):
    for _ in range(200):
        p, q, r = (Point.of(v) for v in rng.uniform(-10, 10, size=(3, 2)))
        assert dist(p, r) <= dist(p, q) + dist(q, r) + 1e-9


def test_point_rejects_non_finite():
    with pytest.raises(ValueError):
        Point(x=float("nan"), y=0.0)


def test_contains_closed_ball():
    d = disk(0, 0, 1)
    assert contains(d, Point(x=1, y=0), tol=0.0)
    assert not contains(d, Point(x=1.1, y=0), tol=0.0)
    assert contains(d, Point(x=1 + 1e-12, y=0), tol=1e-9)
    # default tolerance is 1e-9 * radius
    assert contains(d, Point(x=1 + 1e-10, y=0))


def test_contains_monotone_in_tolerance(rng):
    d = disk(0, 0, 1)
    for x in rng.uniform(0.99, 1.01, size=50):
        p = Point(x=float(x), y=0.0)
        if contains(d, p, tol=1e-4):
            assert contains(d, p, tol=1e-3)


def test_contains_negative_tolerance():
    with pytest.raises(ValueError):
        contains(disk(0, 0, 1), Point(x=0, y=0), tol=-1.0)


def test_intersection_external_tangency():
    pts = circle_circle_intersection(disk(0, 0, 1), disk(2, 0, 1))
    assert len(pts) == 1
    assert pts[0].x == pytest.approx(1.0)
    assert pts[0].y == pytest.approx(0.0, abs=1e-12)


def test_intersection_two_points():
    pts = circle_circle_intersection(disk(0, 0, 1), disk(1, 0, 1))
    assert len(pts) == 2
    got = sorted((round(p.x, 12), round(p.y, 12)) for p in pts)
    h = round(math.sqrt(3.0) / 2.0, 12)
    assert got == [(0.5, -h), (0.5, h)]


def test_intersection_points_lie_on_both_circles(rng):
    for _ in range(100):
        c1, c2 = rng.uniform(-1, 1, size=(2, 2))
        r1, r2 = rng.uniform(0.5, 1.5, size=2)
        d1, d2 = disk(*c1, r1), disk(*c2, r2)
        for q in circle_circle_intersection(d1, d2):
            assert abs(dist(q, d1.center) - r1) <= 1e-9 * r1
            assert abs(dist(q, d2.center) - r2) <= 1e-9 * r2


def test_intersection_separated_and_nested():
    assert circle_circle_intersection(disk(0, 0, 1), disk(3, 0, 1)) == []
    assert circle_circle_intersection(disk(0, 0, 1), disk(0.1, 0, 0.5)) == []


def test_intersection_coincident_raises():
    with pytest.raises(CoincidentCircles):
        circle_circle_intersection(disk(0, 0, 1), disk(0, 0, 1))


def test_intersection_needs_positive_radii():
    with pytest.raises(ValueError):
        circle_circle_intersection(disk(0, 0, 0), disk(1, 0, 1))


def test_pair_intersections_rows():
    centers = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [10.0, 0.0]])
    rows = pair_intersections(centers, np.array([[0, 1], [0, 2], [0, 3]]), 1.0, 1e-9)
    # two crossings for (0,1), a tangency for (0,2), nothing for the far pair
    assert rows.shape == (3, 5)
    tangent = rows[rows[:, 4] == 1]
    assert len(tangent) == 1
    assert tangent[0, 0] == pytest.approx(1.0)
    assert set(map(tuple, rows[:, 2:4].astype(int))) == {(0, 1), (0, 2)}


def test_pair_intersections_coincident():
    centers = np.array([[0.0, 0.0], [0.0, 0.0]])
    with pytest.raises(CoincidentCircles):
        pair_intersections(centers, np.array([[0, 1]]), 1.0, 1e-9)


def test_circle_box_intersections():
    box = Box(xmin=0, ymin=0, xmax=1, ymax=1)
    # inscribed circle touches each edge once
    hits = circle_box_intersections(np.array([0.5, 0.5]), 0.5, box)
    assert len(hits) == 4
    # a circle around a corner crosses the two adjacent edges
    hits = circle_box_intersections(np.array([0.0, 0.0]), 0.3, box)
    assert sorted(map(tuple, np.round(hits[:, :2], 12))) == [(0.0, 0.3), (0.3, 0.0)]


def test_distance_matrix_shape():
    dm = distance_matrix(np.zeros((3, 2)), np.array([[3.0, 4.0], [0.0, 1.0]]))
    assert dm.shape == (3, 2)
    assert np.allclose(dm[:, 0], 5.0)
