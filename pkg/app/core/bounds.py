"""
Closed-form colander size bounds and audits of concrete anchor sets against them
All formulas use their printed constants; known tensions are surfaced as notes, never corrected
"""
import logging
import math
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from app.core.exceptions import SpecInvalid
from app.models.schemas import (
    AnchorSet,
    BoundsReport,
    ColanderSpec,
    FlaggedValue,
    PartitionAudit,
    VerificationReport,
)

logger = logging.getLogger(__name__)

DISK_VC_DIMENSION = 3

UNIFORM_ESTIMATE_NOTE = (
    "r = sqrt(epsilon) is dimensionally inconsistent with r^2 expected regions of area ~epsilon^2 each; "
    "r = 1/sqrt(epsilon) is the likely intent. Compare with the measured required_anchors_for_epsilon."
)
WEAK_BOUND_NOTE = "weak bound uses sqrt(A/epsilon^2) as printed; counting A/(pi epsilon^2) regions gives a 1/sqrt(pi) smaller value"
VC_SHAPE_NOTE = "vc_shape_lower is an order-of-growth form with constant 1 and is not used for consistency"


def _positive(**values: float) -> None:
    for name, value in values.items():
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value}")


def weak_lower_bound(area: float, epsilon: float) -> float:
    """|S| >= sqrt(A / epsilon^2)"""
    _positive(area=area, epsilon=epsilon)
    return math.sqrt(area) / epsilon


def weak_density_bound(a: float, epsilon: float) -> float:
    """The weak bound as a density over [0, a]^2: 1/(a epsilon), which shrinks as the domain grows"""
    _positive(a=a, epsilon=epsilon)
    return 1.0 / (a * epsilon)


def strong_lower_bound(a: float, R: float, epsilon: float) -> float:
    """|S| >= a^2 / (16 R epsilon)"""
    _positive(a=a, R=R, epsilon=epsilon)
    if R >= a / 2.0:
        raise SpecInvalid(f"strong lower bound needs R < a/2 (R={R}, a={a})", {"R": R, "side": a})
    return a * a / (16.0 * R * epsilon)


def vc_shape_lower_bound(R: float, epsilon: float, d: int) -> float:
    """1 / (R^(2 - 2/d) epsilon^(2/d)), order only"""
    _positive(R=R, epsilon=epsilon)
    if d < 1:
        raise ValueError("VC dimension d must be >= 1")
    return 1.0 / (R ** (2.0 - 2.0 / d) * epsilon ** (2.0 / d))


def uniform_anchor_estimate(epsilon: float) -> FlaggedValue:
    """r = sqrt(epsilon), always returned flagged"""
    _positive(epsilon=epsilon)
    logger.warning(f"⚠️ uniform_anchor_estimate({epsilon:.4g}): {UNIFORM_ESTIMATE_NOTE}")
    return FlaggedValue(value=math.sqrt(epsilon), flagged=True, note=UNIFORM_ESTIMATE_NOTE)


def partition_audit(S: AnchorSet, spec: ColanderSpec) -> PartitionAudit:
    """
    Tile [0, a]^2 with 4R x 4R blocks and count the anchors in B(p, 2R) around every block centre p.

    Every colander needs at least R/epsilon anchors per block; the audit reports how many blocks meet that.
    """
    R, a = spec.R, spec.side
    block = 4.0 * R
    k = max(1, int(math.floor(a / block + 1e-9)))
    if k * block > a:
        # domain smaller than one block: a single block centred in the domain
        centers = np.array([[0.5 * a, 0.5 * a]])
    else:
        ticks = block * (np.arange(k) + 0.5)
        gx, gy = np.meshgrid(ticks, ticks)
        centers = np.column_stack([gx.ravel(), gy.ravel()])

    pts = S.as_array()
    if len(pts):
        counts = np.asarray(cKDTree(pts).query_ball_point(centers, 2.0 * R, return_length=True), dtype=int)
    else:
        counts = np.zeros(len(centers), dtype=int)

    requirement = R / spec.epsilon
    satisfied = counts >= requirement * (1.0 - 1e-9)
    return PartitionAudit(
        block_count=len(centers),
        block_side=block,
        requirement=requirement,
        counts=[int(c) for c in counts],
        min_count=int(counts.min()),
        satisfied_fraction=float(satisfied.mean()),
    )


def audit_bounds(
    S: AnchorSet,
    spec: ColanderSpec,
    verified: VerificationReport,
    partition: bool = True,
) -> BoundsReport:
    """
    Compare |S| with every lower bound.

    consistent is False only when S verified as a colander yet has fewer anchors than the weak
    or the strong bound, which would point to a verifier bug.
    """
    a, R, eps = spec.side, spec.R, spec.epsilon
    weak = weak_lower_bound(spec.domain.area, eps)
    strong = strong_lower_bound(a, R, eps)
    size = len(S)

    notes = [WEAK_BOUND_NOTE, VC_SHAPE_NOTE]
    consistent = True
    if verified.is_colander:
        consistent = size >= weak and size >= strong
        if not consistent:
            notes.append(f"|S|={size} is below a lower bound although S verified as a colander")
            logger.error(f"❌ Bounds audit: verified colander with |S|={size} < max(weak={weak:.4g}, strong={strong:.4g})")
    else:
        notes.append("S is not a colander: bounds are reported, consistency is not asserted")

    audit: Optional[PartitionAudit] = partition_audit(S, spec) if partition else None
    report = BoundsReport(
        weak_lower=weak,
        strong_lower=strong,
        vc_shape_lower=vc_shape_lower_bound(R, eps, DISK_VC_DIMENSION),
        weak_density=weak_density_bound(a, eps),
        construction_size=size,
        density=size / spec.domain.area,
        is_colander=verified.is_colander,
        consistent=consistent,
        partition=audit,
        notes=notes,
    )
    logger.info(
        f"🧮 Bounds: |S|={size}, weak={weak:.4g}, strong={strong:.4g}, "
        f"vc-shape={report.vc_shape_lower:.4g}, consistent={consistent}"
    )
    return report
