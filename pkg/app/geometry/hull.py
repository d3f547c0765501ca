"""
Diameter of planar point sets: convex hull (qhull) followed by rotating calipers
"""
import logging
from typing import Optional, Tuple

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist, squareform

logger = logging.getLogger(__name__)

BRUTE_FORCE_LIMIT = 64


def _cross(o: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    return float((a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]))


def _brute_force(points: np.ndarray) -> Tuple[float, int, int]:
    if len(points) < 2:
        return 0.0, 0, 0
    dm = squareform(pdist(points))
    i, j = np.unravel_index(np.argmax(dm), dm.shape)
    return float(dm[i, j]), int(i), int(j)


def rotating_calipers(hull: np.ndarray) -> Tuple[float, int, int]:
    """Farthest pair on a convex polygon given counter-clockwise; returns (distance, i, j)"""
    m = len(hull)
    if m < 3:
        return _brute_force(hull)

    best, bi, bj = 0.0, 0, 0
    j = 1
    for i in range(m):
        ni = (i + 1) % m
        while abs(_cross(hull[i], hull[ni], hull[(j + 1) % m])) > abs(_cross(hull[i], hull[ni], hull[j])):
            j = (j + 1) % m
        for k in (i, ni):
            d = float(np.hypot(*(hull[k] - hull[j])))
            if d > best:
                best, bi, bj = d, k, j
    return best, bi, bj


def farthest_pair(points: np.ndarray) -> Tuple[float, Optional[np.ndarray], Optional[np.ndarray]]:
    """
    Diameter of a point set.

    Args:
        points: (n, 2) array

    Returns:
        (diameter, p, q) with p, q the realizing pair; (0.0, None, None) for an empty set
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(points) == 0:
        return 0.0, None, None
    if len(points) == 1:
        return 0.0, points[0], points[0]
    if len(points) <= BRUTE_FORCE_LIMIT:
        d, i, j = _brute_force(points)
        return d, points[i], points[j]

    try:
        hull = ConvexHull(points)
        polygon = points[hull.vertices]
    except QhullError:
        # collinear or otherwise flat input: the extremes along the main axis carry the diameter
        centered = points - points.mean(axis=0)
        _, _, vt = np.linalg.svd(centered, full_matrices=False)
        proj = centered @ vt[0]
        polygon = points[[int(np.argmin(proj)), int(np.argmax(proj))]]

    d, i, j = rotating_calipers(polygon)
    return d, polygon[i], polygon[j]


def diameter(points: np.ndarray) -> float:
    """Largest pairwise distance of a point cloud"""
    return farthest_pair(points)[0]
