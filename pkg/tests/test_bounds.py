import logging
import math

import pytest

from app.core.bounds import (
    audit_bounds,
    partition_audit,
    strong_lower_bound,
    uniform_anchor_estimate,
    vc_shape_lower_bound,
    weak_density_bound,
    weak_lower_bound,
)
from app.core.colander import construct_grid_colander
from app.core.exceptions import SpecInvalid
from app.models.schemas import AnchorSet, Point, Signature, VerificationMethod, VerificationReport


def report_for(spec, is_colander: bool) -> VerificationReport:
    return VerificationReport(
        is_colander=is_colander,
        max_region_diameter=spec.epsilon,
        worst_signature=Signature(),
        method=VerificationMethod.SAMPLING,
        epsilon=spec.epsilon,
        region=spec.domain.as_box(),
    )


def test_weak_bound():
    assert weak_lower_bound(1.0, 0.1) == pytest.approx(10.0)
    assert weak_lower_bound(4.0, 0.1) == pytest.approx(20.0)


def test_weak_density_shrinks_with_the_domain():
    assert weak_density_bound(2.0, 0.1) == pytest.approx(5.0)
    assert weak_density_bound(4.0, 0.1) < weak_density_bound(2.0, 0.1)


def test_strong_bound():
    assert strong_lower_bound(1.0, 0.1, 0.01) == pytest.approx(62.5)


def test_strong_bound_needs_small_radius():
    with pytest.raises(SpecInvalid):
        strong_lower_bound(1.0, 0.5, 0.01)


def test_vc_shape_bound():
    assert vc_shape_lower_bound(0.1, 0.01, 3) == pytest.approx(464.1588833612779)
    # d = 1 drops the R dependence
    assert vc_shape_lower_bound(0.3, 0.1, 1) == pytest.approx(100.0)
    with pytest.raises(ValueError):
        vc_shape_lower_bound(0.1, 0.01, 0)


@pytest.mark.parametrize("call", [
    lambda: weak_lower_bound(0.0, 0.1),
    lambda: weak_lower_bound(1.0, -0.1),
    lambda: strong_lower_bound(1.0, 0.0, 0.1),
    lambda: weak_density_bound(1.0, 0.0),
    lambda: uniform_anchor_estimate(0.0),
])
def test_non_positive_inputs(call):
    with pytest.raises(ValueError):
        call()


def test_uniform_estimate_is_flagged(caplog):
    with caplog.at_level(logging.WARNING, logger="app.core.bounds"):
        value = uniform_anchor_estimate(0.01)
    assert value.value == pytest.approx(0.1)
    assert value.flagged
    assert "1/sqrt(epsilon)" in value.note
    assert caplog.records


def test_partition_audit_on_grid_colander(grid_colander, grid_spec):
    audit = partition_audit(grid_colander, grid_spec)
    assert audit.block_side == pytest.approx(1.0)
    assert audit.block_count == 1
    assert audit.requirement == pytest.approx(grid_spec.R / grid_spec.epsilon)
    assert audit.min_count >= audit.requirement
    assert audit.satisfied_fraction == 1.0


def test_partition_audit_tiles_the_domain(fine_spec):
    S = construct_grid_colander(fine_spec)
    audit = partition_audit(S, fine_spec)
    assert audit.block_count == 4
    assert len(audit.counts) == 4
    assert audit.satisfied_fraction == 1.0


def test_partition_audit_of_empty_set(grid_spec):
    audit = partition_audit(AnchorSet(), grid_spec)
    assert audit.min_count == 0
    assert audit.satisfied_fraction == 0.0


def test_verified_colander_is_consistent(grid_colander, grid_spec):
    report = audit_bounds(grid_colander, grid_spec, report_for(grid_spec, True))
    assert report.consistent
    assert report.construction_size == len(grid_colander)
    assert report.construction_size >= report.weak_lower
    assert report.construction_size >= report.strong_lower
    assert report.density == pytest.approx(len(grid_colander))
    assert report.partition is not None


def test_small_set_claimed_as_colander_is_flagged(grid_spec):
    S = AnchorSet(points=[Point(x=0.5, y=0.5)])
    report = audit_bounds(S, grid_spec, report_for(grid_spec, True), partition=False)
    assert not report.consistent
    assert report.partition is None
    assert any("below a lower bound" in note for note in report.notes)


def test_non_colander_is_not_judged(grid_spec):
    S = AnchorSet(points=[Point(x=0.5, y=0.5)])
    report = audit_bounds(S, grid_spec, report_for(grid_spec, False))
    assert report.consistent
    assert not report.is_colander
    assert math.isfinite(report.vc_shape_lower)
