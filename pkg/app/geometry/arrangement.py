"""
Arrangements of equal-radius disks
Enumerates the signature classes (epsilon-confusable regions) of n disks of radius R,
counts them and estimates their diameters; a grid-sampling oracle cross-checks the result
"""
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import cKDTree

from app.config.settings import Settings, get_settings
from app.core.exceptions import DegenerateInput, EmptyFace, GridTooLarge, TooManyAnchors
from app.geometry.geom_core import (
    Region,
    as_box,
    circle_box_intersections,
    default_tolerance,
    distance_matrix,
    pair_intersections,
)
from app.geometry.hull import farthest_pair
from app.models.schemas import (
    AnchorSet,
    Arrangement,
    Box,
    ConfusableRegion,
    Disk,
    Point,
    SampledSignatures,
    Signature,
)

logger = logging.getLogger(__name__)

Anchors = Union[AnchorSet, np.ndarray, Sequence[Point]]

# distance-matrix entries evaluated per chunk
CHUNK_ENTRIES = 2_000_000


def anchor_array(anchors: Anchors) -> np.ndarray:
    if isinstance(anchors, AnchorSet):
        return anchors.as_array()
    if isinstance(anchors, np.ndarray):
        return np.asarray(anchors, dtype=float).reshape(-1, 2)
    return np.array([p.as_tuple() for p in anchors], dtype=float).reshape(-1, 2)


# ---------------------------------------------------------------------------
# Signature kernel
# ---------------------------------------------------------------------------

def classify_points(
    points: np.ndarray,
    centers: np.ndarray,
    R: float,
    tol: float,
    with_clearance: bool = False,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Membership of many points in many closed disks.

    Returns:
        keys: (m, ceil(n/8)) uint8 rows, the packed membership bits (one row per point)
        clearance: distance from each point to the nearest circle (inf if not requested)
    """
    m, n = len(points), len(centers)
    keys = np.zeros((m, max(1, (n + 7) // 8)), dtype=np.uint8)
    clearance = np.full(m, np.inf)
    if n == 0 or m == 0:
        return keys, clearance
    step = max(1, CHUNK_ENTRIES // n)
    for start in range(0, m, step):
        stop = min(start + step, m)
        dm = distance_matrix(points[start:stop], centers)
        keys[start:stop] = np.packbits(dm <= R + tol, axis=1)
        if with_clearance:
            clearance[start:stop] = np.abs(dm - R).min(axis=1)
    return keys, clearance


def unpack_key(key: np.ndarray, n: int) -> Tuple[int, ...]:
    if n == 0:
        return ()
    bits = np.unpackbits(key)[:n]
    return tuple(int(i) for i in np.flatnonzero(bits))


def group_keys(keys: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Distinct key rows and, for every input row, the index of its group"""
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    return uniq, np.asarray(inverse).ravel()


def point_signature(p: Point, anchors: Anchors, R: float) -> Signature:
    """Indices of all anchors within R + tau of p"""
    centers = anchor_array(anchors)
    if len(centers) == 0:
        return Signature()
    d = np.hypot(centers[:, 0] - p.x, centers[:, 1] - p.y)
    return Signature(members=tuple(int(i) for i in np.flatnonzero(d <= R + default_tolerance(R))))


# ---------------------------------------------------------------------------
# Sampling oracle
# ---------------------------------------------------------------------------

def sampling_grid(box: Box, resolution: float, max_cells: Optional[int] = None) -> np.ndarray:
    """Regular grid of pitch `resolution`, shifted off the box corner by an irrational fraction of the pitch"""
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    max_cells = max_cells or get_settings().max_grid_cells
    off = Settings.SAMPLING_OFFSET * resolution

    def axis(lo: float, hi: float) -> np.ndarray:
        span = hi - lo
        if span < off:
            return np.array([0.5 * (lo + hi)])
        count = int(math.floor((span - off) / resolution)) + 1
        return lo + off + resolution * np.arange(count)

    nx = max(1, int(math.floor(max(box.width - off, 0.0) / resolution)) + 1)
    ny = max(1, int(math.floor(max(box.height - off, 0.0) / resolution)) + 1)
    if nx * ny > max_cells:
        raise GridTooLarge(
            f"sampling grid of {nx}x{ny} cells exceeds the cap of {max_cells}",
            {"cells": nx * ny, "cap": max_cells},
        )
    xs, ys = axis(box.xmin, box.xmax), axis(box.ymin, box.ymax)
    gx, gy = np.meshgrid(xs, ys, indexing="xy")
    return np.column_stack([gx.ravel(), gy.ravel()])


def signatures_via_sampling(
    anchors: Anchors,
    R: float,
    domain: Region,
    resolution: float,
    clip_disk: Optional[Disk] = None,
    include_corners: bool = False,
) -> SampledSignatures:
    """
    Brute-force oracle for the signature classes: evaluate point_signature on a regular grid.

    Args:
        anchors: anchor set
        R: transmission radius
        domain: region to sample (DomainSquare or Box)
        resolution: grid pitch
        clip_disk: keep only samples inside this disk
        include_corners: add the region corners to the samples

    Returns:
        SampledSignatures mapping each signature to its sample points
    """
    box = as_box(domain)
    centers = anchor_array(anchors)
    pts = sampling_grid(box, resolution)
    if include_corners:
        pts = np.vstack([pts, box.corners()])
    if clip_disk is not None:
        c = clip_disk.center
        inside = np.hypot(pts[:, 0] - c.x, pts[:, 1] - c.y) <= clip_disk.radius
        pts = pts[inside]

    keys, _ = classify_points(pts, centers, R, default_tolerance(R))
    table: Dict[Tuple[int, ...], np.ndarray] = {}
    if len(pts):
        uniq, inverse = group_keys(keys)
        order = np.argsort(inverse, kind="stable")
        bounds = np.searchsorted(inverse[order], np.arange(1, len(uniq)))
        for g, members in enumerate(np.split(order, bounds)):
            table[unpack_key(uniq[g], len(centers))] = pts[members]

    logger.debug(f"🔷 Sampled {len(pts)} points at pitch {resolution:.3g}: {len(table)} signature classes")
    return SampledSignatures(resolution=resolution, region=box, samples=table, point_count=len(pts))


# ---------------------------------------------------------------------------
# Analytic face enumeration
# ---------------------------------------------------------------------------

def _unit(v: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    norms = np.hypot(v[:, 0], v[:, 1])
    ok = norms > 1e-12
    out = np.zeros_like(v)
    out[ok] = v[ok] / norms[ok, None]
    return out, ok


class ArrangementBuilder:
    """Builds the signature classes of an equal-disk arrangement from candidate probe points"""

    def __init__(
        self,
        R: float,
        offset: Optional[float] = None,
        arc_step: Optional[float] = None,
        max_anchors: Optional[int] = None,
    ):
        cfg = get_settings()
        if R <= 0:
            raise ValueError("R must be positive")
        self.R = R
        self.tol = default_tolerance(R)
        self.eta = offset if offset is not None else cfg.offset_factor * R
        self.arc_step = arc_step if arc_step is not None else cfg.arc_step
        self.max_anchors = max_anchors or cfg.max_anchors
        # probes closer than this to any circle are treated as boundary points
        self.guard = 10.0 * self.tol

        self._probes: List[np.ndarray] = []
        self._boundary: List[np.ndarray] = []

    def _add(self, probes: np.ndarray, boundary: Optional[np.ndarray] = None) -> None:
        if len(probes) == 0:
            return
        if boundary is None:
            boundary = np.full_like(probes, np.nan)
        self._probes.append(probes)
        self._boundary.append(boundary)

    def _check_input(self, centers: np.ndarray) -> None:
        n = len(centers)
        if n > self.max_anchors:
            raise TooManyAnchors(
                f"{n} anchors exceed the arrangement cap of {self.max_anchors}",
                {"anchors": n, "cap": self.max_anchors},
            )
        if n > 1:
            close = cKDTree(centers).query_pairs(self.tol)
            if close:
                i, j = sorted(close)[0]
                raise DegenerateInput(
                    f"anchors {i} and {j} coincide within {self.tol:.3g}; deduplicate first",
                    {"pair": [i, j]},
                )

    def _vertex_probes(self, centers: np.ndarray, verts: np.ndarray) -> None:
        if len(verts) == 0:
            return
        v = verts[:, :2]
        i, j = verts[:, 2].astype(int), verts[:, 3].astype(int)
        ni = (v - centers[i]) / self.R
        nj = (v - centers[j]) / self.R
        ti = np.column_stack([-ni[:, 1], ni[:, 0]])
        for direction in (ni + nj, -(ni + nj), ni - nj, nj - ni, ti, -ti):
            unit, ok = _unit(direction)
            self._add(v[ok] + self.eta * unit[ok], v[ok])

    def _arc_probes(self, centers: np.ndarray, verts: np.ndarray, box: Optional[Box], dense: bool) -> None:
        """Points on every circle (axis extremes always, plus the angular grid and vertex angles when dense)
        probed just inside and just outside"""
        base = [0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi]
        if dense:
            base = np.union1d(base, np.arange(0.0, 2.0 * math.pi, self.arc_step))
        base = np.asarray(base, dtype=float)

        extra: Dict[int, List[float]] = {}
        if dense:
            for row in verts:
                for k in (int(row[2]), int(row[3])):
                    c = centers[k]
                    extra.setdefault(k, []).append(math.atan2(row[1] - c[1], row[0] - c[0]))
            if box is not None:
                for k, c in enumerate(centers):
                    hits = circle_box_intersections(c, self.R, box)
                    for h in hits:
                        extra.setdefault(k, []).append(math.atan2(h[1] - c[1], h[0] - c[0]))

        for k, c in enumerate(centers):
            angles = base if k not in extra else np.concatenate([base, extra[k]])
            u = np.column_stack([np.cos(angles), np.sin(angles)])
            on_arc = c + self.R * u
            if box is not None:
                keep = box.contains_array(on_arc)
                u, on_arc = u[keep], on_arc[keep]
            self._add(c + (self.R - self.eta) * u, on_arc)
            self._add(c + (self.R + self.eta) * u, on_arc)

    def _box_probes(self, centers: np.ndarray, box: Box) -> None:
        corners = box.corners()
        inward = np.array([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]])
        for angle in (math.radians(10.0), math.radians(45.0), math.radians(80.0)):
            ca, sa = math.cos(angle), math.sin(angle)
            dirs = np.column_stack([inward[:, 0] * ca, inward[:, 1] * sa])
            self._add(corners + self.eta * dirs, corners)

        for c in centers:
            hits = circle_box_intersections(c, self.R, box)
            if len(hits) == 0:
                continue
            xy, m = hits[:, :2], hits[:, 2:]
            e = np.column_stack([-m[:, 1], m[:, 0]])
            n = (xy - c) / self.R
            for direction in (m + e, m - e, m, m + n, m - n):
                unit, ok = _unit(direction)
                self._add(xy[ok] + self.eta * unit[ok], xy[ok])

    def build(self, anchors: Anchors, domain: Optional[Region] = None, compute_diameters: bool = True) -> Arrangement:
        centers = anchor_array(anchors)
        self._check_input(centers)
        box = as_box(domain)
        n, R = len(centers), self.R
        self._probes, self._boundary = [], []

        if n > 1:
            pairs = np.array(sorted(cKDTree(centers).query_pairs(2.0 * R + self.tol)), dtype=int).reshape(-1, 2)
        else:
            pairs = np.empty((0, 2), dtype=int)
        verts = pair_intersections(centers, pairs, R, self.tol)
        if box is not None and len(verts):
            verts = verts[box.contains_array(verts[:, :2])]

        self._vertex_probes(centers, verts)
        self._add(centers.copy())
        self._arc_probes(centers, verts, box, dense=compute_diameters)
        if box is not None:
            self._box_probes(centers, box)
        elif n:
            far = centers.min(axis=0) - 3.0 * R
            self._add(far[None, :])
        else:
            self._add(np.zeros((1, 2)))

        probes = np.vstack(self._probes)
        boundary = np.vstack(self._boundary)
        if box is not None:
            inside = box.contains_array(probes)
            probes, boundary = probes[inside], boundary[inside]

        keys, clearance = classify_points(probes, centers, R, self.tol, with_clearance=True)
        uniq, inverse = group_keys(keys)
        valid = clearance >= self.guard

        faces: List[ConfusableRegion] = []
        accuracy = 2.0 * R * self.arc_step if compute_diameters else 0.0
        order = np.argsort(inverse, kind="stable")
        splits = np.searchsorted(inverse[order], np.arange(1, len(uniq)))
        for g, members in enumerate(np.split(order, splits)):
            real = members[valid[members]]
            if len(real) == 0:
                continue
            signature = Signature(members=unpack_key(uniq[g], n))
            rep = probes[real[np.argmax(clearance[real])]]
            pts = boundary[members]
            pts = pts[~np.isnan(pts[:, 0])]
            pts = np.vstack([pts, rep[None, :]])
            if box is None and len(signature) == 0:
                diameter = math.inf
            elif compute_diameters:
                diameter = farthest_pair(pts)[0]
            else:
                diameter = 0.0
            faces.append(ConfusableRegion(
                signature=signature,
                representative=Point.of(rep),
                diameter=diameter,
                accuracy=accuracy,
                sample_points=pts,
            ))
        faces.sort(key=lambda f: (len(f.signature), f.signature.members))

        vertex_count = 0
        if len(verts):
            quantum = 1e-7 * R
            vertex_count = len(np.unique(np.round(verts[:, :2] / quantum).astype(np.int64), axis=0))

        arrangement = Arrangement(
            radius=R,
            disks=[Disk(center=Point.of(c), radius=R) for c in centers],
            faces=faces,
            vertex_count=vertex_count,
            face_count=len(faces),
            clip=box,
            vertices=verts[:, :2] if len(verts) else np.empty((0, 2)),
        )
        logger.debug(
            f"🔷 Arrangement of {n} disks: {vertex_count} vertices, {len(faces)} signature classes"
            + (" (clipped)" if box is not None else "")
        )
        return arrangement


def build_arrangement(
    anchors: Anchors,
    R: float,
    domain: Optional[Region] = None,
    compute_diameters: bool = True,
) -> Arrangement:
    """Signature classes of the disks {B(s, R): s in anchors}, clipped to `domain` when given"""
    return ArrangementBuilder(R).build(anchors, domain, compute_diameters=compute_diameters)


def count_faces(arr: Arrangement) -> int:
    return arr.face_count


def face_diameter(face: ConfusableRegion, arr: Arrangement) -> float:
    """
    Max pairwise distance over the face's boundary candidate set (vertices, arc extremes, arc samples).

    Underestimates the true diameter by at most 2R * arc_step. The unclipped empty-signature face is
    unbounded and reported as +inf.
    """
    if arr.clip is None and len(face.signature) == 0:
        return math.inf
    if face.sample_points is None or len(face.sample_points) == 0:
        raise EmptyFace(f"face {face.signature.as_list()} has no boundary candidates")
    return farthest_pair(face.sample_points)[0]


def arrangement_to_dict(arr: Arrangement) -> Dict:
    """JSON export: {radius, disks:[{x,y}], faces:[{signature, rep, diameter}]}"""
    return {
        "radius": arr.radius,
        "disks": [{"x": d.center.x, "y": d.center.y} for d in arr.disks],
        "vertex_count": arr.vertex_count,
        "face_count": arr.face_count,
        "faces": [
            {
                "signature": f.signature.as_list(),
                "rep": {"x": f.representative.x, "y": f.representative.y},
                "diameter": f.diameter if math.isfinite(f.diameter) else None,
            }
            for f in arr.faces
        ],
    }
