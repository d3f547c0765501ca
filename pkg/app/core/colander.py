"""
(R, epsilon)-colanders: the grid construction, verification of the colander property,
localization from a heard signature and restriction to a neighbourhood
"""
import logging
import math
from typing import Dict, Optional, Tuple

import numpy as np

from app.config.settings import Settings, get_settings
from app.core.exceptions import CrossCheckFailure, InfeasibleSignature, SpecInvalid
from app.geometry.arrangement import (
    Anchors,
    anchor_array,
    build_arrangement,
    classify_points,
    point_signature,
    sampling_grid,
    signatures_via_sampling,
    unpack_key,
    group_keys,
)
from app.geometry.geom_core import default_tolerance
from app.geometry.hull import diameter, farthest_pair
from app.models.schemas import (
    AnchorSet,
    Box,
    ColanderSpec,
    Disk,
    Point,
    Provenance,
    RegionEstimate,
    Signature,
    VerificationMethod,
    VerificationReport,
    VerificationScope,
)

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
# integer range limits are floored with this slack so that e.g. sqrt(2)/(0.1*sqrt(2)) + 1 counts as 11
INDEX_SLACK = 1e-9


def check_spec(spec: ColanderSpec, allow_half: bool = False) -> None:
    """Standing assumptions: epsilon > 0 and R < a/2 (R = a/2 admitted with allow_half)"""
    if spec.epsilon <= 0 or spec.R <= 0:
        raise SpecInvalid("R and epsilon must be positive", {"R": spec.R, "epsilon": spec.epsilon})
    half = spec.side / 2.0
    if spec.R > half or (spec.R == half and not allow_half):
        raise SpecInvalid(
            f"R={spec.R} must be smaller than half the domain side a/2={spec.side / 2.0}",
            {"R": spec.R, "side": spec.side},
        )


# ---------------------------------------------------------------------------
# Grid construction
# ---------------------------------------------------------------------------

def grid_index_sets(spec: ColanderSpec) -> Tuple[np.ndarray, np.ndarray]:
    """
    K = {xR : 0 <= x <= a/R + 1} and J = {y eps/sqrt2 : 0 <= y <= a sqrt2/eps + 1}.
    """
    a = spec.side
    kmax = int(math.floor(a / spec.R + 1.0 + INDEX_SLACK))
    jmax = int(math.floor(a * SQRT2 / spec.epsilon + 1.0 + INDEX_SLACK))
    K = spec.R * np.arange(kmax + 1, dtype=float)
    J = (spec.epsilon / SQRT2) * np.arange(jmax + 1, dtype=float)
    return K, J


def construct_grid_colander(spec: ColanderSpec) -> AnchorSet:
    """
    S = (K x J) u (J x K): vertical lines every R carrying points every eps/sqrt2, and the transposed set.

    Lattice points shared by both halves appear once.
    """
    check_spec(spec, allow_half=True)
    K, J = grid_index_sets(spec)
    kk, jj = np.meshgrid(K, J, indexing="ij")
    vertical = np.column_stack([kk.ravel(), jj.ravel()])
    horizontal = vertical[:, ::-1]
    merge_tol = get_settings().construction_merge_factor * min(spec.R, spec.epsilon / SQRT2)

    anchors = AnchorSet.from_array(
        np.vstack([vertical, horizontal]),
        provenance=Provenance.GRID_CONSTRUCTION,
        merge_tol=merge_tol,
    )
    density = len(anchors) / spec.domain.area
    logger.info(
        f"🧮 Grid colander: |K|={len(K)}, |J|={len(J)}, |S|={len(anchors)}, "
        f"density={density:.4g} (8/(R eps)={8.0 / (spec.R * spec.epsilon):.4g})"
    )
    return anchors


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

def _pair(p: Optional[np.ndarray], q: Optional[np.ndarray]) -> Optional[Tuple[Point, Point]]:
    if p is None or q is None:
        return None
    return (Point.of(p), Point.of(q))


def _sampling_worst(S: Anchors, spec: ColanderSpec, box: Box, resolution: float, clip_disk: Optional[Disk]):
    table = signatures_via_sampling(
        S, spec.R, box, resolution, clip_disk=clip_disk, include_corners=clip_disk is None
    )
    per_class: Dict[Tuple[int, ...], float] = {}
    worst = (-1.0, (), None, None)
    for key, pts in table.samples.items():
        d, p, q = farthest_pair(pts)
        per_class[key] = d
        if d > worst[0]:
            worst = (d, key, p, q)
    return worst, per_class


def _analytic_worst(S: Anchors, spec: ColanderSpec, box: Box):
    arr = build_arrangement(S, spec.R, box)
    per_class: Dict[Tuple[int, ...], float] = {}
    worst = (-1.0, (), None, None)
    accuracy = 0.0
    for face in arr.faces:
        per_class[face.signature.members] = face.diameter
        accuracy = max(accuracy, face.accuracy)
        if face.diameter > worst[0]:
            d, p, q = farthest_pair(face.sample_points)
            worst = (face.diameter, face.signature.members, p, q)
    return worst, per_class, accuracy


def verify_colander(
    S: AnchorSet,
    spec: ColanderSpec,
    method: VerificationMethod = VerificationMethod.SAMPLING,
    resolution: Optional[float] = None,
    region: Optional[Box] = None,
    clip_disk: Optional[Disk] = None,
    scope: Optional[VerificationScope] = None,
) -> VerificationReport:
    """
    Check that every pair of points in the region with equal signatures is within epsilon.

    Args:
        S: anchor set under test
        spec: (R, epsilon, a)
        method: analytic (arrangement faces), sampling (grid oracle) or both (cross-checked)
        resolution: sampling pitch, epsilon/10 by default
        region: box to verify over, the whole domain by default
        clip_disk: restrict sampling to this disk as well (sampling only)
        scope: label stored in the report

    Returns:
        VerificationReport; is_colander iff max diameter <= epsilon + slack
    """
    check_spec(spec)
    method = VerificationMethod(method)
    if resolution is None:
        resolution = spec.epsilon / Settings.VERIFY_PITCH_DIVISOR
    if method != VerificationMethod.ANALYTIC and resolution > spec.epsilon / 4.0:
        logger.warning(
            f"⚠️ Sampling pitch {resolution:.4g} exceeds epsilon/4={spec.epsilon / 4.0:.4g}; "
            f"the verdict is not meaningful"
        )
    if clip_disk is not None and method != VerificationMethod.SAMPLING:
        raise ValueError("disk-clipped verification is only available with the sampling method")

    box = region or spec.domain.as_box()
    if scope is None:
        scope = VerificationScope.FULL if region is None else VerificationScope.CUSTOM

    analytic = sampling = None
    if method in (VerificationMethod.SAMPLING, VerificationMethod.BOTH):
        sampling = _sampling_worst(S, spec, box, resolution, clip_disk)
    if method in (VerificationMethod.ANALYTIC, VerificationMethod.BOTH):
        analytic = _analytic_worst(S, spec, box)

    if method == VerificationMethod.BOTH:
        (_, samp_classes), (_, an_classes, accuracy) = sampling, analytic
        allowance = 2.0 * resolution + accuracy
        for key, d_samp in samp_classes.items():
            d_an = an_classes.get(key)
            # classes sampled only on circle boundaries (e.g. lattice corners) have no 2-D face
            if d_an is None and d_samp <= allowance:
                continue
            if d_an is None or d_samp > d_an + allowance:
                raise CrossCheckFailure(
                    f"sampling class {list(key)} (diameter {d_samp:.6g}) not matched by the arrangement "
                    f"(diameter {d_an})",
                    {"signature": list(key), "sampling": d_samp, "analytic": d_an},
                )

    if analytic is not None:
        (worst_d, worst_key, p, q), classes, _ = analytic
        slack = 0.0
    else:
        (worst_d, worst_key, p, q), classes = sampling
        slack = 2.0 * resolution
    worst_d = max(worst_d, 0.0)

    report = VerificationReport(
        is_colander=worst_d <= spec.epsilon + slack,
        max_region_diameter=worst_d,
        worst_signature=Signature(members=worst_key),
        worst_pair=_pair(p, q),
        method=method,
        resolution_used=0.0 if method == VerificationMethod.ANALYTIC else resolution,
        epsilon=spec.epsilon,
        slack=slack,
        scope=scope,
        region=box,
        region_count=len(classes),
        analytic_diameter=analytic[0][0] if analytic is not None else None,
        sampling_diameter=sampling[0][0] if sampling is not None else None,
    )
    verdict = "✅ colander" if report.is_colander else "❌ not a colander"
    logger.info(
        f"🧮 Verification [{method.value}/{scope.value}] |S|={len(S)}: {verdict}, "
        f"max diameter {worst_d:.6g} vs epsilon {spec.epsilon:.6g} (+{slack:.3g})"
    )
    return report


def verify_both_scopes(
    S: AnchorSet,
    spec: ColanderSpec,
    method: VerificationMethod = VerificationMethod.SAMPLING,
    resolution: Optional[float] = None,
) -> VerificationReport:
    """Full-domain report with the interior [R, a-R]^2 report attached"""
    full = verify_colander(S, spec, method, resolution)
    interior = spec.domain.interior(spec.R)
    if interior is not None:
        full.interior = verify_colander(
            S, spec, method, resolution, region=interior, scope=VerificationScope.INTERIOR
        )
    return full


# ---------------------------------------------------------------------------
# Localization
# ---------------------------------------------------------------------------

class ColanderLocalizer:
    """Decodes signatures back to positions from one sampled consistency table per (S, spec)"""

    REFINEMENT_FACTORS = (4, 16)

    def __init__(self, S: AnchorSet, spec: ColanderSpec, pitch: Optional[float] = None):
        check_spec(spec)
        self.S = S
        self.spec = spec
        self.centers = anchor_array(S)
        self.pitch = pitch or min(
            spec.epsilon / Settings.VERIFY_PITCH_DIVISOR, spec.R / Settings.LOCALIZE_PITCH_DIVISOR
        )
        self.table = signatures_via_sampling(S, spec.R, spec.domain, self.pitch).samples if len(S) else {}
        logger.info(
            f"🧮 Localizer ready: {len(self.table)} signature classes sampled at pitch {self.pitch:.4g}"
        )

    def _refine(self, key: Tuple[int, ...]) -> Optional[np.ndarray]:
        box = self.spec.domain.as_box()
        for i in key:
            c = self.centers[i]
            disk_box = Box(xmin=c[0] - self.spec.R, ymin=c[1] - self.spec.R,
                           xmax=c[0] + self.spec.R, ymax=c[1] + self.spec.R)
            box = box.intersect(disk_box)
            if box is None:
                return None
        factors = self.REFINEMENT_FACTORS if key else self.REFINEMENT_FACTORS[:1]
        for factor in factors:
            pts = sampling_grid(box, self.pitch / factor)
            keys, _ = classify_points(pts, self.centers, self.spec.R, self.spec.tolerance)
            uniq, inverse = group_keys(keys)
            for g, row in enumerate(uniq):
                if unpack_key(row, len(self.centers)) == key:
                    logger.debug(f"🧮 Signature {list(key)} resolved at pitch {self.pitch / factor:.3g}")
                    return pts[inverse == g]
        return None

    def localize(self, sig: Signature) -> RegionEstimate:
        spec = self.spec
        if len(self.S) == 0:
            if len(sig):
                raise InfeasibleSignature("an empty anchor set hears nothing", {"signature": sig.as_list()})
            box = spec.domain.as_box()
            return RegionEstimate(
                representative=box.center, diameter_bound=box.diagonal, signature=sig, sample_count=0
            )
        if any(i < 0 or i >= len(self.S) for i in sig.members):
            raise InfeasibleSignature("signature refers to unknown anchors", {"signature": sig.as_list()})

        pts = self.table.get(sig.members)
        if pts is None:
            pts = self._refine(sig.members)
        if pts is None or len(pts) == 0:
            raise InfeasibleSignature(
                f"no domain point realizes signature {sig.as_list()} at pitch {self.pitch:.3g}",
                {"signature": sig.as_list()},
            )

        centroid = pts.mean(axis=0)
        rep = Point.of(centroid)
        if point_signature(rep, self.centers, spec.R) != sig:
            # non-convex region: fall back to the sample nearest the centroid
            nearest = np.argmin(np.hypot(pts[:, 0] - centroid[0], pts[:, 1] - centroid[1]))
            rep = Point.of(pts[nearest])
        return RegionEstimate(
            representative=rep,
            diameter_bound=diameter(pts),
            signature=sig,
            sample_count=len(pts),
        )


def localize(sig: Signature, S: AnchorSet, spec: ColanderSpec) -> RegionEstimate:
    """Centroid and diameter of {q in domain : signature(q) = sig}"""
    return ColanderLocalizer(S, spec).localize(sig)


# ---------------------------------------------------------------------------
# Restriction
# ---------------------------------------------------------------------------

def restrict_colander(S: AnchorSet, p: Point, R: float) -> AnchorSet:
    """S n B(p, 2R), recording the parent index of every kept anchor"""
    centers = anchor_array(S)
    if len(centers) == 0:
        return AnchorSet(points=[], provenance=Provenance.RESTRICTION, source_indices=[])
    d = np.hypot(centers[:, 0] - p.x, centers[:, 1] - p.y)
    keep = np.flatnonzero(d <= 2.0 * R + default_tolerance(R))
    return AnchorSet(
        points=[S.points[i] for i in keep],
        provenance=Provenance.RESTRICTION,
        source_indices=[int(i) for i in keep],
    )


def verify_restricted(
    S: AnchorSet,
    spec: ColanderSpec,
    p: Point,
    resolution: Optional[float] = None,
    region: Optional[Box] = None,
) -> VerificationReport:
    """Verify S n B(p, 2R) over B(p, R), optionally intersected with `region`"""
    restricted = restrict_colander(S, p, spec.R)
    disk = Disk(center=p, radius=spec.R)
    box = Box.around(disk).intersect(region or spec.domain.as_box())
    if box is None:
        raise SpecInvalid("B(p, R) does not meet the verification region", {"p": p.as_tuple()})
    return verify_colander(
        restricted, spec, VerificationMethod.SAMPLING, resolution,
        region=box, clip_disk=disk, scope=VerificationScope.CUSTOM,
    )
