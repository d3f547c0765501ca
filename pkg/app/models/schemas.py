"""
Pydantic models for the colander toolkit
Value types (points, disks, regions), problem parameters and every report the toolkit emits
"""
import math
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator

from app.config.settings import get_settings


class Provenance(str, Enum):
    GRID_CONSTRUCTION = "grid-construction"
    FILE = "file"
    RANDOM = "random"
    RESTRICTION = "restriction"
    UNIFORM_GRID = "uniform-grid"


class VerificationMethod(str, Enum):
    ANALYTIC = "analytic"
    SAMPLING = "sampling"
    BOTH = "both"


class VerificationScope(str, Enum):
    FULL = "full"
    INTERIOR = "interior"
    CUSTOM = "custom"


class RangeKind(str, Enum):
    ALL_DISKS = "all-disks"
    EQUAL_DISKS = "equal-disks"
    SQUARE_TRANSLATES = "square-translates"


# ---------------------------------------------------------------------------
# Geometry value types
# ---------------------------------------------------------------------------

class Point(BaseModel):
    """Planar point, same length unit as R"""
    model_config = ConfigDict(frozen=True)

    x: float = Field(..., description="x coordinate")
    y: float = Field(..., description="y coordinate")

    @field_validator("x", "y")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("coordinates must be finite")
        return float(value)

    def as_tuple(self) -> Tuple[float, float]:
        return (self.x, self.y)

    @classmethod
    def of(cls, xy) -> "Point":
        return cls(x=float(xy[0]), y=float(xy[1]))


class Disk(BaseModel):
    """Closed ball B(center, radius)"""
    model_config = ConfigDict(frozen=True)

    center: Point
    radius: float = Field(..., ge=0, description="Radius, closed-ball semantics")


class Box(BaseModel):
    """Axis-aligned closed rectangle; the domain, its interior and clip windows are boxes"""
    model_config = ConfigDict(frozen=True)

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    @model_validator(mode="after")
    def _ordered(self) -> "Box":
        if self.xmax < self.xmin or self.ymax < self.ymin:
            raise ValueError("box corners out of order")
        return self

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    @property
    def center(self) -> Point:
        return Point(x=0.5 * (self.xmin + self.xmax), y=0.5 * (self.ymin + self.ymax))

    def corners(self) -> np.ndarray:
        return np.array([
            [self.xmin, self.ymin],
            [self.xmax, self.ymin],
            [self.xmax, self.ymax],
            [self.xmin, self.ymax],
        ])

    def contains_array(self, pts: np.ndarray, margin: float = 0.0) -> np.ndarray:
        return (
            (pts[:, 0] >= self.xmin - margin) & (pts[:, 0] <= self.xmax + margin)
            & (pts[:, 1] >= self.ymin - margin) & (pts[:, 1] <= self.ymax + margin)
        )

    @classmethod
    def around(cls, disk: Disk) -> "Box":
        c, r = disk.center, disk.radius
        return cls(xmin=c.x - r, ymin=c.y - r, xmax=c.x + r, ymax=c.y + r)

    def intersect(self, other: "Box") -> Optional["Box"]:
        xmin, ymin = max(self.xmin, other.xmin), max(self.ymin, other.ymin)
        xmax, ymax = min(self.xmax, other.xmax), min(self.ymax, other.ymax)
        if xmax < xmin or ymax < ymin:
            return None
        return Box(xmin=xmin, ymin=ymin, xmax=xmax, ymax=ymax)


class DomainSquare(BaseModel):
    """The square domain [0, a]^2"""
    model_config = ConfigDict(frozen=True)

    side: float = Field(..., gt=0, description="Side length a")

    @property
    def area(self) -> float:
        return self.side * self.side

    def as_box(self) -> Box:
        return Box(xmin=0.0, ymin=0.0, xmax=self.side, ymax=self.side)

    def interior(self, R: float) -> Optional[Box]:
        """[R, a-R]^2, or None when R >= a/2 leaves nothing"""
        if 2.0 * R >= self.side:
            return None
        return Box(xmin=R, ymin=R, xmax=self.side - R, ymax=self.side - R)


# ---------------------------------------------------------------------------
# Signatures and arrangements
# ---------------------------------------------------------------------------

class Signature(BaseModel):
    """Canonical set of anchor indices heard at a point"""
    model_config = ConfigDict(frozen=True)

    members: Tuple[int, ...] = Field(default_factory=tuple, description="Sorted anchor indices")

    @field_validator("members", mode="before")
    @classmethod
    def _canonical(cls, value) -> Tuple[int, ...]:
        return tuple(sorted({int(v) for v in value}))

    @classmethod
    def of(cls, members) -> "Signature":
        return cls(members=tuple(members))

    def __len__(self) -> int:
        return len(self.members)

    def as_list(self) -> List[int]:
        return list(self.members)


class ConfusableRegion(BaseModel):
    """One signature class of the disk arrangement"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    signature: Signature
    representative: Point = Field(..., description="Interior point realizing the signature")
    diameter: float = Field(0.0, ge=0, description="Diameter estimate; +inf for the unbounded face")
    accuracy: float = Field(0.0, ge=0, description="Largest possible underestimate of the diameter")
    sample_points: Optional[np.ndarray] = Field(
        None, exclude=True, description="Boundary candidate set the diameter is computed from"
    )

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.diameter)


class Arrangement(BaseModel):
    """Signature classes of n equal disks, optionally clipped to a box"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    radius: float = Field(..., gt=0)
    disks: List[Disk] = Field(default_factory=list)
    faces: List[ConfusableRegion] = Field(default_factory=list)
    vertex_count: int = Field(0, ge=0)
    face_count: int = Field(0, ge=0)
    clip: Optional[Box] = Field(None, description="Clip region, None for the whole plane")
    vertices: Optional[np.ndarray] = Field(None, exclude=True)

    def face_for(self, signature: Signature) -> Optional[ConfusableRegion]:
        for face in self.faces:
            if face.signature == signature:
                return face
        return None


class SampledSignatures(BaseModel):
    """Signature classes found on a sampling grid, with their sample points"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    resolution: float
    region: Box
    samples: Dict[Tuple[int, ...], np.ndarray] = Field(default_factory=dict)
    point_count: int = 0

    def signatures(self) -> List[Signature]:
        return [Signature(members=key) for key in sorted(self.samples)]

    def __len__(self) -> int:
        return len(self.samples)


# ---------------------------------------------------------------------------
# Colander problem types
# ---------------------------------------------------------------------------

class ColanderSpec(BaseModel):
    """(R, epsilon, a) problem parameters"""
    model_config = ConfigDict(frozen=True)

    R: float = Field(..., gt=0, description="Transmission radius")
    epsilon: float = Field(..., gt=0, description="Target localization uncertainty")
    domain: DomainSquare

    @classmethod
    def of(cls, R: float, epsilon: float, side: float) -> "ColanderSpec":
        return cls(R=R, epsilon=epsilon, domain=DomainSquare(side=side))

    @property
    def side(self) -> float:
        return self.domain.side

    @property
    def tolerance(self) -> float:
        return get_settings().tolerance_factor * self.R


class AnchorSet(BaseModel):
    """Ordered anchor points (a candidate colander S)"""

    points: List[Point] = Field(default_factory=list)
    provenance: Provenance = Provenance.FILE
    source_indices: Optional[List[int]] = Field(
        None, description="Indices into the parent set, recorded by restriction"
    )

    _array: Optional[np.ndarray] = PrivateAttr(default=None)

    def __len__(self) -> int:
        return len(self.points)

    def as_array(self) -> np.ndarray:
        if self._array is None or len(self._array) != len(self.points):
            self._array = np.array([p.as_tuple() for p in self.points], dtype=float).reshape(-1, 2)
        return self._array

    @classmethod
    def from_array(
        cls,
        arr: np.ndarray,
        provenance: Provenance = Provenance.FILE,
        merge_tol: Optional[float] = None,
        source_indices: Optional[List[int]] = None,
    ) -> "AnchorSet":
        """Build from an (n, 2) array; points closer than merge_tol to an earlier point are dropped"""
        arr = np.asarray(arr, dtype=float).reshape(-1, 2)
        keep = list(range(len(arr)))
        if merge_tol is not None and len(arr) > 1:
            from scipy.spatial import cKDTree
            tree = cKDTree(arr)
            dropped = set()
            keep = []
            for i in range(len(arr)):
                if i in dropped:
                    continue
                keep.append(i)
                for j in tree.query_ball_point(arr[i], merge_tol):
                    if j > i:
                        dropped.add(j)
        if source_indices is not None:
            source_indices = [source_indices[i] for i in keep]
        anchors = cls(
            points=[Point(x=float(arr[i, 0]), y=float(arr[i, 1])) for i in keep],
            provenance=provenance,
            source_indices=source_indices,
        )
        return anchors


class VerificationReport(BaseModel):
    """Outcome of checking the colander property over one region"""

    is_colander: bool
    max_region_diameter: float = Field(..., ge=0)
    worst_signature: Signature
    worst_pair: Optional[Tuple[Point, Point]] = None
    method: VerificationMethod
    resolution_used: float = Field(0.0, ge=0)
    epsilon: float
    slack: float = Field(0.0, ge=0)
    scope: VerificationScope = VerificationScope.FULL
    region: Box
    region_count: int = Field(0, ge=0, description="Signature classes met in the region")
    analytic_diameter: Optional[float] = None
    sampling_diameter: Optional[float] = None
    interior: Optional["VerificationReport"] = None


class RegionEstimate(BaseModel):
    """Localization answer for one signature"""

    representative: Point
    diameter_bound: float = Field(..., ge=0)
    signature: Signature
    sample_count: int = Field(0, ge=0)


# ---------------------------------------------------------------------------
# Range spaces
# ---------------------------------------------------------------------------

class RangeFamily(BaseModel):
    """Family of ranges: all closed disks, radius-R disks or translates of a square"""
    model_config = ConfigDict(frozen=True)

    kind: RangeKind
    radius: Optional[float] = Field(None, gt=0)
    side: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def _parameters(self) -> "RangeFamily":
        if self.kind == RangeKind.EQUAL_DISKS and self.radius is None:
            raise ValueError("equal-disks needs a radius")
        if self.kind == RangeKind.SQUARE_TRANSLATES and self.side is None:
            raise ValueError("square-translates needs a side")
        return self

    @classmethod
    def all_disks(cls) -> "RangeFamily":
        return cls(kind=RangeKind.ALL_DISKS)

    @classmethod
    def equal_disks(cls, radius: float) -> "RangeFamily":
        return cls(kind=RangeKind.EQUAL_DISKS, radius=radius)

    @classmethod
    def square_translates(cls, side: float) -> "RangeFamily":
        return cls(kind=RangeKind.SQUARE_TRANSLATES, side=side)


class RangeWitness(BaseModel):
    """A concrete range realizing one subset"""

    subset: Tuple[int, ...]
    center: Point
    radius: Optional[float] = None
    side: Optional[float] = None
    half_plane: bool = Field(False, description="Radius is a large-disk stand-in for a half-plane")


class ShatterResult(BaseModel):
    shattered: bool
    witness_ranges: List[RangeWitness] = Field(default_factory=list)
    missing_subset: Optional[Tuple[int, ...]] = None


# ---------------------------------------------------------------------------
# Bounds and experiments
# ---------------------------------------------------------------------------

class FlaggedValue(BaseModel):
    """A formula value carried together with a warning about the formula itself"""

    value: float
    flagged: bool = False
    note: str = ""


class PartitionAudit(BaseModel):
    """Per-block anchor counts behind the strong lower bound"""

    block_count: int = Field(..., ge=0)
    block_side: float
    requirement: float = Field(..., description="R/epsilon anchors needed per block")
    counts: List[int] = Field(default_factory=list)
    min_count: int = 0
    satisfied_fraction: float = Field(1.0, ge=0, le=1)


class BoundsReport(BaseModel):
    weak_lower: float
    strong_lower: float
    vc_shape_lower: float
    weak_density: float
    construction_size: int = Field(..., ge=0)
    density: float
    is_colander: bool
    consistent: bool
    partition: Optional[PartitionAudit] = None
    notes: List[str] = Field(default_factory=list)


class TrialResult(BaseModel):
    r: int = Field(..., ge=0, description="Anchor count")
    R: float
    a: float
    seed: int
    trial_index: int = 0
    face_count: int = Field(..., ge=1, description="Signature classes over the whole plane")
    domain_face_count: int = Field(..., ge=1, description="Signature classes met in [0,a]^2")
    max_region_diameter: Optional[float] = Field(None, ge=0, description="None when only faces were counted")
    mean_region_diameter: Optional[float] = Field(None, ge=0)
    achieved_epsilon: Optional[float] = Field(None, ge=0)


class ScalingFit(BaseModel):
    exponent: float
    intercept: float
    r_values: List[int]
    mean_face_counts: List[float]
    trials_per_r: int

    @field_validator("r_values")
    @classmethod
    def _increasing(cls, value: List[int]) -> List[int]:
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("r_values must be strictly increasing")
        return value


class RunConfig(BaseModel):
    """Validated CLI invocation"""

    subcommand: str
    R: Optional[float] = Field(None, gt=0)
    epsilon: Optional[float] = Field(None, gt=0)
    side: Optional[float] = Field(None, gt=0)
    anchors_path: Optional[str] = None
    out_path: Optional[str] = None
    svg_path: Optional[str] = None
    seed: int = 0
    method: VerificationMethod = VerificationMethod.SAMPLING
    resolution: Optional[float] = Field(None, gt=0)
    verbose: bool = False
    options: Dict[str, Any] = Field(default_factory=dict)

    def spec(self) -> ColanderSpec:
        return ColanderSpec.of(self.R, self.epsilon, self.side)


VerificationReport.model_rebuild()
