"""
Range spaces over small planar point sets
Sauer's function, realizability of subsets by disks or square translates, shattering tests,
pattern counting and randomized VC-dimension estimates
"""
import itertools
import logging
import math
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import linprog

from app.config.settings import get_settings
from app.core.exceptions import TooManyPoints
from app.geometry.arrangement import Anchors, anchor_array, build_arrangement
from app.models.schemas import Point, RangeFamily, RangeKind, RangeWitness, ShatterResult
from app.utils.seeding import stream

logger = logging.getLogger(__name__)

Pattern = Tuple[int, ...]

# perturbation applied to the tight points of a candidate circle (normalized coordinates)
PERTURBATION = 1e-7
# radius of the disk standing in for a half-plane, in units of the point-set spread
HALF_PLANE_RADIUS = 1e6
TINY_RADIUS = 1e-6
LP_MARGIN = 1e-9
MAX_VC_POINTS = 8


def sauer_g(n: int, d: int) -> int:
    """g(n, d) = sum_{i<=d} C(n, i), exact"""
    if n < 0 or d < 0:
        raise ValueError("sauer_g needs n, d >= 0")
    return sum(math.comb(n, i) for i in range(min(n, d) + 1))


# ---------------------------------------------------------------------------
# Candidate ranges
# ---------------------------------------------------------------------------

class _Normalized:
    """Point set translated to its centroid and scaled to unit spread"""

    def __init__(self, A: Anchors):
        pts = anchor_array(A)
        self.points = pts
        self.origin = pts.mean(axis=0) if len(pts) else np.zeros(2)
        spread = float(np.ptp(pts, axis=0).max()) if len(pts) > 1 else 0.0
        self.spread = spread if spread > 0 else 1.0
        self.q = (pts - self.origin) / self.spread
        self.z = (self.q ** 2).sum(axis=1)

    def disk_witness(self, subset: Pattern, center: np.ndarray, r2: float, half_plane: bool = False) -> RangeWitness:
        return RangeWitness(
            subset=subset,
            center=Point.of(self.origin + self.spread * center),
            radius=self.spread * math.sqrt(max(r2, 0.0)),
            half_plane=half_plane,
        )


def _sign_vectors(k: int) -> np.ndarray:
    return np.array(list(itertools.product((1.0, -1.0), repeat=k)))


def _lifted_inside(norm: _Normalized, centers: np.ndarray, consts: np.ndarray) -> np.ndarray:
    """|q|^2 - 2 c.q + K <= 0 for every candidate (rows) and point (columns)"""
    return norm.z[None, :] - 2.0 * centers @ norm.q.T + consts[:, None] <= 0.0


def _circle_candidates(norm: _Normalized, tight: np.ndarray, centers: np.ndarray, consts: np.ndarray):
    """
    Perturb circles through the `tight` points by every sign pattern on those points.

    Adding an affine g(q) = u.q + w to the lifted circle |q|^2 - 2c.q + K keeps it a circle
    (center c - u/2, constant K + w); g is chosen with g = -sign * PERTURBATION on the tight points.
    """
    m, k = tight.shape
    signs = _sign_vectors(k)
    M = np.concatenate([norm.q[tight], np.ones((m, k, 1))], axis=2)
    rhs = -PERTURBATION * signs
    sol = np.einsum("mij,sj->msi", np.linalg.pinv(M), rhs)
    new_centers = centers[:, None, :] - 0.5 * sol[..., :2]
    new_consts = consts[:, None] + sol[..., 2]
    return new_centers.reshape(-1, 2), new_consts.ravel()


def _all_disk_candidates(norm: _Normalized):
    n = len(norm.q)
    centers: List[np.ndarray] = []
    consts: List[np.ndarray] = []

    # empty, singletons, full set
    far = np.array([[10.0, 10.0]])
    centers.append(far)
    consts.append(np.array([200.0 - TINY_RADIUS ** 2]))
    centers.append(norm.q.copy())
    consts.append(norm.z - TINY_RADIUS ** 2)
    centers.append(np.zeros((1, 2)))
    consts.append(np.array([-100.0]))

    if n >= 2:
        pairs = np.array(list(itertools.combinations(range(n), 2)))
        mid = 0.5 * (norm.q[pairs[:, 0]] + norm.q[pairs[:, 1]])
        r2 = 0.25 * ((norm.q[pairs[:, 0]] - norm.q[pairs[:, 1]]) ** 2).sum(axis=1)
        c, k = _circle_candidates(norm, pairs, mid, (mid ** 2).sum(axis=1) - r2)
        centers.append(c)
        consts.append(k)

    if n >= 3:
        triples = np.array(list(itertools.combinations(range(n), 3)))
        a, b, c = (norm.q[triples[:, i]] for i in range(3))
        d = 2.0 * (a[:, 0] * (b[:, 1] - c[:, 1]) + b[:, 0] * (c[:, 1] - a[:, 1]) + c[:, 0] * (a[:, 1] - b[:, 1]))
        ok = np.abs(d) > 1e-12
        if np.any(ok):
            a, b, c, d, triples = a[ok], b[ok], c[ok], d[ok], triples[ok]
            za, zb, zc = (a ** 2).sum(1), (b ** 2).sum(1), (c ** 2).sum(1)
            ux = (za * (b[:, 1] - c[:, 1]) + zb * (c[:, 1] - a[:, 1]) + zc * (a[:, 1] - b[:, 1])) / d
            uy = (za * (c[:, 0] - b[:, 0]) + zb * (a[:, 0] - c[:, 0]) + zc * (b[:, 0] - a[:, 0])) / d
            cc = np.column_stack([ux, uy])
            r2 = ((a - cc) ** 2).sum(axis=1)
            cand_c, cand_k = _circle_candidates(norm, triples, cc, (cc ** 2).sum(axis=1) - r2)
            centers.append(cand_c)
            consts.append(cand_k)

    return np.vstack(centers), np.concatenate(consts)


def _half_plane_candidates(norm: _Normalized) -> Tuple[np.ndarray, np.ndarray]:
    """Lines through every pair, both orientations, tight points perturbed by every sign pattern.
    Returns (normals, offsets) for the half-planes normal.q + offset <= 0."""
    n = len(norm.q)
    if n < 2:
        return np.empty((0, 2)), np.empty(0)
    normals, offsets = [], []
    for i, j in itertools.combinations(range(n), 2):
        e = norm.q[j] - norm.q[i]
        length = math.hypot(e[0], e[1])
        if length <= 1e-12:
            continue
        e = e / length
        for orient in (1.0, -1.0):
            nrm = orient * np.array([-e[1], e[0]])
            for si, sj in itertools.product((1.0, -1.0), repeat=2):
                alpha = PERTURBATION * (si - sj) / length
                v = nrm + alpha * e
                offsets.append(-v @ norm.q[i] - si * PERTURBATION)
                normals.append(v)
    return np.array(normals), np.array(offsets)


def _probe_centers(norm: _Normalized, probe_density: float, reach: float) -> np.ndarray:
    lo, hi = norm.q.min(axis=0) - reach, norm.q.max(axis=0) + reach
    pitch = 1.0 / probe_density
    xs = np.arange(lo[0], hi[0] + pitch, pitch)
    ys = np.arange(lo[1], hi[1] + pitch, pitch)
    gx, gy = np.meshgrid(xs, ys)
    return np.column_stack([gx.ravel(), gy.ravel()])


def _collect(patterns: Dict[Pattern, RangeWitness], masks: np.ndarray, make_witness) -> None:
    """Add the distinct rows of a boolean mask matrix; make_witness(row_index, subset) builds the range"""
    if len(masks) == 0:
        return
    _, first = np.unique(np.packbits(masks, axis=1), axis=0, return_index=True)
    for row in first:
        subset = tuple(int(i) for i in np.flatnonzero(masks[row]))
        if subset not in patterns:
            patterns[subset] = make_witness(int(row), subset)


def _all_disk_patterns(norm: _Normalized, probe_density: Optional[float]) -> Dict[Pattern, RangeWitness]:
    patterns: Dict[Pattern, RangeWitness] = {}
    centers, consts = _all_disk_candidates(norm)
    masks = _lifted_inside(norm, centers, consts)
    _collect(patterns, masks, lambda r, s: norm.disk_witness(s, centers[r], centers[r] @ centers[r] - consts[r]))

    normals, offsets = _half_plane_candidates(norm)
    if len(normals):
        masks = normals @ norm.q.T + offsets[:, None] <= 0.0

        def half_plane(r: int, subset: Pattern) -> RangeWitness:
            scale = math.hypot(*normals[r])
            unit, b = normals[r] / scale, -offsets[r] / scale
            return norm.disk_witness(subset, (b - HALF_PLANE_RADIUS) * unit, HALF_PLANE_RADIUS ** 2, half_plane=True)

        _collect(patterns, masks, half_plane)

    if probe_density and len(norm.q):
        probes = _probe_centers(norm, probe_density, 1.0)
        dist = np.sqrt(((probes[:, None, :] - norm.q[None, :, :]) ** 2).sum(axis=2))
        ranks = np.argsort(np.argsort(dist, axis=1, kind="stable"), axis=1, kind="stable")
        ordered = np.sort(dist, axis=1)
        n = len(norm.q)
        for k in range(n + 1):
            masks = ranks < k
            if k == 0:
                radius = 0.5 * ordered[:, 0]
            elif k == n:
                radius = ordered[:, -1] + 1.0
            else:
                radius = 0.5 * (ordered[:, k - 1] + ordered[:, k])
            _collect(patterns, masks, lambda r, s: norm.disk_witness(s, probes[r], radius[r] ** 2))
    return patterns


def _equal_disk_patterns(A: np.ndarray, R: float, probe_density: Optional[float]) -> Dict[Pattern, RangeWitness]:
    """Ranges B(c, R) contain exactly the points of A within R of c: the faces of the arrangement of B(a, R)"""
    patterns: Dict[Pattern, RangeWitness] = {}
    arr = build_arrangement(A, R, compute_diameters=False)
    for face in arr.faces:
        patterns[face.signature.members] = RangeWitness(
            subset=face.signature.members, center=face.representative, radius=R
        )
    if probe_density and len(A):
        norm = _Normalized(A)
        probes = norm.origin + norm.spread * _probe_centers(norm, probe_density, R / norm.spread)
        masks = np.hypot(probes[:, None, 0] - A[None, :, 0], probes[:, None, 1] - A[None, :, 1]) <= R
        _collect(patterns, masks, lambda r, s: RangeWitness(subset=s, center=Point.of(probes[r]), radius=R))
    return patterns


def _square_patterns(A: np.ndarray, side: float) -> Dict[Pattern, RangeWitness]:
    """A closed square of the given side centred at c contains a iff |c_x - a_x| <= side/2 and |c_y - a_y| <= side/2;
    the candidate centres are the cells of the two 1-D interval arrangements"""
    h = 0.5 * side
    patterns: Dict[Pattern, RangeWitness] = {}

    def axis_candidates(values: np.ndarray) -> np.ndarray:
        breaks = np.unique(np.concatenate([values - h, values + h]))
        mids = 0.5 * (breaks[:-1] + breaks[1:])
        return np.concatenate([breaks, mids, [breaks[0] - h, breaks[-1] + h]])

    xs, ys = axis_candidates(A[:, 0]), axis_candidates(A[:, 1])
    gx, gy = np.meshgrid(xs, ys)
    centers = np.column_stack([gx.ravel(), gy.ravel()])
    reach = h * (1.0 + 1e-12)
    masks = (
        (np.abs(centers[:, None, 0] - A[None, :, 0]) <= reach)
        & (np.abs(centers[:, None, 1] - A[None, :, 1]) <= reach)
    )
    _collect(patterns, masks, lambda r, s: RangeWitness(subset=s, center=Point.of(centers[r]), side=side))
    return patterns


def pattern_table(A: Anchors, fam: RangeFamily, probe_density: Optional[float] = None) -> Dict[Pattern, RangeWitness]:
    """
    Every subset of A cut out by a candidate range of the family, with a witness range.

    Args:
        A: point set (at most max_signature_points points)
        fam: range family
        probe_density: optional extra sweep of range centres on a grid with this many probes per unit spread

    Returns:
        {subset: RangeWitness}, ordered by subset size then lexicographically
    """
    pts = anchor_array(A)
    cap = get_settings().max_signature_points
    if len(pts) > cap:
        raise TooManyPoints(f"{len(pts)} points exceed the pattern enumeration cap of {cap}", {"points": len(pts)})

    if len(pts) == 0:
        table = {(): RangeWitness(subset=(), center=Point(x=0.0, y=0.0), radius=0.0)}
    elif fam.kind == RangeKind.ALL_DISKS:
        table = _all_disk_patterns(_Normalized(pts), probe_density)
    elif fam.kind == RangeKind.EQUAL_DISKS:
        table = _equal_disk_patterns(pts, fam.radius, probe_density)
    else:
        table = _square_patterns(pts, fam.side)
    return dict(sorted(table.items(), key=lambda kv: (len(kv[0]), kv[0])))


# ---------------------------------------------------------------------------
# Realizability and shattering
# ---------------------------------------------------------------------------

def _separating_disk(norm: _Normalized, subset: Pattern) -> Optional[RangeWitness]:
    """
    Exact test for all-disks: lift q -> (q, |q|^2); a disk cuts out `subset` iff some non-vertical plane
    has the lifted subset strictly below it and the rest strictly above. Solved as a linear program.
    """
    n = len(norm.q)
    sign = np.ones(n)
    sign[list(subset)] = -1.0
    A_ub = np.column_stack([sign[:, None] * norm.q, sign, np.ones(n)])
    b_ub = sign * norm.z
    res = linprog(
        c=[0.0, 0.0, 0.0, -1.0],
        A_ub=A_ub,
        b_ub=b_ub,
        bounds=[(None, None)] * 3 + [(None, 1.0)],
        method="highs",
    )
    if res.status != 0 or -res.fun <= LP_MARGIN:
        return None
    a1, a2, b, _ = res.x
    center = 0.5 * np.array([a1, a2])
    return norm.disk_witness(subset, center, b + center @ center)


def _check_size(A: np.ndarray) -> None:
    cap = get_settings().max_range_points
    if len(A) > cap:
        raise TooManyPoints(f"{len(A)} points exceed the exhaustive realizability cap of {cap}", {"points": len(A)})


def _realize(
    subset: Pattern,
    table: Dict[Pattern, RangeWitness],
    fam: RangeFamily,
    norm: Optional[_Normalized],
) -> Optional[RangeWitness]:
    witness = table.get(subset)
    if witness is None and fam.kind == RangeKind.ALL_DISKS and norm is not None:
        witness = _separating_disk(norm, subset)
        if witness is not None:
            table[subset] = witness
    return witness


def can_realize_subset(A: Anchors, Y, fam: RangeFamily) -> Tuple[bool, Optional[RangeWitness]]:
    """Is there a range of the family containing exactly the points A[Y]? Returns (decision, witness)."""
    pts = anchor_array(A)
    _check_size(pts)
    subset = tuple(sorted({int(i) for i in Y}))
    if any(i < 0 or i >= len(pts) for i in subset):
        raise IndexError(f"subset {list(subset)} refers to points outside A")
    table = pattern_table(pts, fam)
    norm = _Normalized(pts) if len(pts) else None
    witness = _realize(subset, table, fam, norm)
    return witness is not None, witness


def is_shattered(A: Anchors, fam: RangeFamily) -> ShatterResult:
    """All 2^|A| subsets realized? Subsets are tried by size, stopping at the first failure."""
    pts = anchor_array(A)
    _check_size(pts)
    table = pattern_table(pts, fam)
    norm = _Normalized(pts) if len(pts) else None
    witnesses: List[RangeWitness] = []
    for size in range(len(pts) + 1):
        for subset in itertools.combinations(range(len(pts)), size):
            witness = _realize(subset, table, fam, norm)
            if witness is None:
                return ShatterResult(shattered=False, witness_ranges=witnesses, missing_subset=subset)
            witnesses.append(witness)
    return ShatterResult(shattered=True, witness_ranges=witnesses)


def distinct_signature_count(A: Anchors, fam: RangeFamily, probe_density: Optional[float] = None) -> int:
    """Number of distinct A n range patterns over the candidate ranges; never more than 2^|A|"""
    return len(pattern_table(A, fam, probe_density))


# ---------------------------------------------------------------------------
# VC-dimension estimation
# ---------------------------------------------------------------------------

def _scale(fam: RangeFamily) -> float:
    """Size of the window random candidate sets are drawn from"""
    if fam.kind == RangeKind.EQUAL_DISKS:
        return fam.radius
    if fam.kind == RangeKind.SQUARE_TRANSLATES:
        return fam.side
    return 1.0


def structured_candidates(n: int, fam: RangeFamily, seed: int) -> List[np.ndarray]:
    """Regular polygons (two phases) and a jittered grid, sized to the family's window"""
    L = _scale(fam)
    radius = 0.45 * L
    out = []
    for phase in (0.0, math.pi / max(n, 1)):
        angles = phase + 2.0 * math.pi * np.arange(n) / n
        out.append(radius * np.column_stack([np.cos(angles), np.sin(angles)]))
    k = int(math.ceil(math.sqrt(n)))
    pitch = 0.9 * L / max(k, 1) / math.sqrt(2.0)
    gx, gy = np.meshgrid(np.arange(k), np.arange(k))
    grid = pitch * np.column_stack([gx.ravel(), gy.ravel()])[:n]
    jitter = stream(seed, n, 1 << 20).uniform(-0.05 * pitch, 0.05 * pitch, size=grid.shape)
    out.append(grid + jitter)
    return out


def vc_dimension_estimate(fam: RangeFamily, n_max: int = 5, trials: int = 200, seed: int = 0) -> int:
    """
    Largest n <= n_max for which one of the structured sets or `trials` random n-point sets is shattered.

    The value is certified as a lower bound; the upper side only holds by exhaustion over the sets tried.
    Deterministic given seed.
    """
    if not 1 <= n_max <= MAX_VC_POINTS:
        raise ValueError(f"n_max must lie in [1, {MAX_VC_POINTS}]")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    L = _scale(fam)

    best = 0
    for n in range(1, n_max + 1):
        candidates = structured_candidates(n, fam, seed)
        found = False
        for pts in candidates:
            if is_shattered(pts, fam).shattered:
                found = True
                break
        trial = 0
        while not found and trial < trials:
            rng = stream(seed, n, trial)
            if fam.kind == RangeKind.EQUAL_DISKS:
                # any two points within R of each other: sample a disk of diameter R
                rho = 0.5 * L * np.sqrt(rng.uniform(size=n))
                theta = rng.uniform(0.0, 2.0 * math.pi, size=n)
                pts = np.column_stack([rho * np.cos(theta), rho * np.sin(theta)])
            else:
                pts = rng.uniform(0.0, L, size=(n, 2))
            found = is_shattered(pts, fam).shattered
            trial += 1
        logger.debug(f"🧮 {fam.kind.value}: n={n} shattered={found}")
        if not found:
            break
        best = n

    logger.info(
        f"🧮 VC dimension of {fam.kind.value}: {best} "
        f"(estimated; lower bound certified, upper bound by exhaustion up to n_max={n_max})"
    )
    return best
