"""
Planar primitives: distances, closed-disk membership and circle-circle intersection
All values are 64-bit floats; boundary tests use an explicit additive tolerance tau = 1e-9 * radius
"""
import logging
import math
from typing import List, Optional, Union

import numpy as np

from app.config.settings import get_settings
from app.core.exceptions import CoincidentCircles
from app.models.schemas import Box, Disk, DomainSquare, Point

logger = logging.getLogger(__name__)

Region = Union[Box, DomainSquare]


def default_tolerance(radius: float) -> float:
    """tau for a given radius"""
    return get_settings().tolerance_factor * radius


def as_box(region: Optional[Region]) -> Optional[Box]:
    if region is None or isinstance(region, Box):
        return region
    return region.as_box()


def dist(p: Point, q: Point) -> float:
    """Euclidean distance"""
    return math.hypot(p.x - q.x, p.y - q.y)


def contains(d: Disk, p: Point, tol: Optional[float] = None) -> bool:
    """Closed-ball membership; points within tol outside the boundary count as inside"""
    if tol is None:
        tol = default_tolerance(d.radius)
    if tol < 0:
        raise ValueError("tolerance must be non-negative")
    return dist(d.center, p) <= d.radius + tol


def circle_circle_intersection(d1: Disk, d2: Disk, tol: Optional[float] = None) -> List[Point]:
    """
    Boundary/boundary intersection of two circles.

    Returns 0 points when the circles are separated or strictly nested, 1 when they are
    tangent within tol, 2 otherwise. Coincident circles raise CoincidentCircles.
    """
    if d1.radius <= 0 or d2.radius <= 0:
        raise ValueError("circle radii must be positive")
    r1, r2 = d1.radius, d2.radius
    if tol is None:
        tol = default_tolerance(max(r1, r2))

    dx, dy = d2.center.x - d1.center.x, d2.center.y - d1.center.y
    d = math.hypot(dx, dy)

    if d <= tol:
        if abs(r1 - r2) <= tol:
            raise CoincidentCircles(
                "coincident circles have no finite intersection",
                {"center": d1.center.as_tuple(), "radius": r1},
            )
        return []
    if d > r1 + r2 + tol or d < abs(r1 - r2) - tol:
        return []

    ux, uy = dx / d, dy / d
    a = (d * d + r1 * r1 - r2 * r2) / (2.0 * d)
    h2 = r1 * r1 - a * a
    tangent = abs(d - (r1 + r2)) <= tol or abs(d - abs(r1 - r2)) <= tol
    if tangent or h2 <= 0.0:
        return [Point(x=d1.center.x + a * ux, y=d1.center.y + a * uy)]

    h = math.sqrt(h2)
    mx, my = d1.center.x + a * ux, d1.center.y + a * uy
    return [
        Point(x=mx - h * uy, y=my + h * ux),
        Point(x=mx + h * uy, y=my - h * ux),
    ]


def pair_intersections(centers: np.ndarray, pairs: np.ndarray, R: float, tol: float) -> np.ndarray:
    """
    Vectorized intersections for equal circles of radius R.

    Returns an (m, 5) array of rows (x, y, i, j, tangent_flag) for every vertex
    produced by the given index pairs. Pairs farther than 2R + tol apart contribute nothing.
    """
    if len(pairs) == 0:
        return np.empty((0, 5))
    c1 = centers[pairs[:, 0]]
    c2 = centers[pairs[:, 1]]
    delta = c2 - c1
    d = np.hypot(delta[:, 0], delta[:, 1])
    if np.any(d <= tol):
        i, j = pairs[np.argmax(d <= tol)]
        raise CoincidentCircles("coincident anchors produce coincident circles", {"pair": [int(i), int(j)]})

    keep = d <= 2.0 * R + tol
    c1, delta, d, pairs = c1[keep], delta[keep], d[keep], pairs[keep]
    u = delta / d[:, None]
    mid = c1 + 0.5 * delta
    h2 = R * R - 0.25 * d * d
    tangent = (np.abs(d - 2.0 * R) <= tol) | (h2 <= 0.0)
    h = np.sqrt(np.clip(h2, 0.0, None))
    perp = np.column_stack([-u[:, 1], u[:, 0]])

    rows = []
    single = tangent
    if np.any(single):
        rows.append(np.column_stack([mid[single], pairs[single], np.ones(single.sum())]))
    double = ~tangent
    if np.any(double):
        up = mid[double] + h[double, None] * perp[double]
        down = mid[double] - h[double, None] * perp[double]
        pd = pairs[double]
        zeros = np.zeros(double.sum())
        rows.append(np.column_stack([up, pd, zeros]))
        rows.append(np.column_stack([down, pd, zeros]))
    return np.vstack(rows) if rows else np.empty((0, 5))


def circle_box_intersections(center: np.ndarray, R: float, box: Box) -> np.ndarray:
    """Points where a circle meets the four edges of a box, as (m, 4) rows (x, y, mx, my)
    with (mx, my) the inward normal of the edge that was hit"""
    out = []
    cx, cy = float(center[0]), float(center[1])
    for value, axis, normal in (
        (box.xmin, 0, (1.0, 0.0)),
        (box.xmax, 0, (-1.0, 0.0)),
        (box.ymin, 1, (0.0, 1.0)),
        (box.ymax, 1, (0.0, -1.0)),
    ):
        offset = value - (cx if axis == 0 else cy)
        if abs(offset) > R:
            continue
        half = math.sqrt(max(R * R - offset * offset, 0.0))
        for s in ((-half, half) if half > 0 else (0.0,)):
            if axis == 0:
                x, y = value, cy + s
                if box.ymin <= y <= box.ymax:
                    out.append((x, y, normal[0], normal[1]))
            else:
                x, y = cx + s, value
                if box.xmin <= x <= box.xmax:
                    out.append((x, y, normal[0], normal[1]))
    return np.array(out, dtype=float).reshape(-1, 4)


def distance_matrix(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """(len(points), len(centers)) Euclidean distances"""
    diff = points[:, None, :] - centers[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])
