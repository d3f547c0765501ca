import math

import numpy as np
import pytest

from app.config.settings import get_settings
from app.core.exceptions import DegenerateInput, EmptyFace, GridTooLarge, TooManyAnchors
from app.core.vc_analysis import sauer_g
from app.geometry.arrangement import (
    arrangement_to_dict,
    build_arrangement,
    count_faces,
    face_diameter,
    point_signature,
    sampling_grid,
    signatures_via_sampling,
)
from app.models.schemas import Box, ConfusableRegion, DomainSquare, Point, Signature


def P(x, y):
    return Point(x=x, y=y)


def test_point_signature_examples():
    assert point_signature(P(0, 0), [P(0, 0)], 1.0) == Signature.of([0])
    assert point_signature(P(5, 5), [P(0, 0)], 1.0) == Signature()
    anchors = [P(0, 0), P(1, 0), P(9, 9)]
    assert point_signature(P(0.5, 0), anchors, 1.0).members == (0, 1)


def test_point_signature_closed_boundary():
    assert point_signature(P(0.6, 0.0), [P(0, 0)], 0.6).members == (0,)


def test_signature_is_canonical():
    assert Signature.of([3, 1, 3, 2]).members == (1, 2, 3)


def test_empty_arrangement_is_the_plane():
    arr = build_arrangement([], 1.0)
    assert count_faces(arr) == 1
    assert math.isinf(arr.faces[0].diameter)


def test_single_disk():
    arr = build_arrangement([P(0, 0)], 1.0)
    assert count_faces(arr) == 2
    assert [f.signature.members for f in arr.faces] == [(), (0,)]
    inside = arr.face_for(Signature.of([0]))
    assert abs(inside.diameter - 2.0) <= 2.0 * inside.accuracy + 1e-9
    assert face_diameter(inside, arr) == pytest.approx(inside.diameter)


def test_two_overlapping_disks():
    arr = build_arrangement([P(0, 0), P(1, 0)], 1.0)
    assert count_faces(arr) == 4
    assert arr.vertex_count == 2
    assert {f.signature.members for f in arr.faces} == {(), (0,), (1,), (0, 1)}


def test_two_disjoint_disks():
    assert count_faces(build_arrangement([P(0, 0), P(3, 0)], 1.0)) == 3


def test_three_generic_disks():
    pts = [P(0, 0), P(1, 0), P(0.5, 0.8)]
    assert count_faces(build_arrangement(pts, 1.0)) == 8


def test_lens_diameter():
    R, delta = 1.0, 0.1
    arr = build_arrangement([P(0, 0), P(2 * R - delta, 0)], R)
    lens = arr.face_for(Signature.of([0, 1]))
    height = 2.0 * math.sqrt(R * R - (R - delta / 2.0) ** 2)
    assert lens.diameter == pytest.approx(height, abs=lens.accuracy + 1e-6)


def test_representatives_reproduce_signatures(rng):
    for _ in range(20):
        centers = rng.uniform(0, 3, size=(6, 2))
        arr = build_arrangement(centers, 1.0)
        for face in arr.faces:
            assert point_signature(face.representative, centers, 1.0) == face.signature


def test_face_count_ceilings(rng):
    for _ in range(200):
        n = int(rng.integers(1, 13))
        centers = rng.uniform(0, 4, size=(n, 2))
        faces = count_faces(build_arrangement(centers, 1.0, compute_diameters=False))
        assert faces <= n * n - n + 2
        assert faces <= sauer_g(n, 3)


def test_face_diameter_bounded_by_disk():
    centers = np.array([[0, 0], [0.7, 0.2], [0.3, 0.9], [1.4, 0.5]])
    arr = build_arrangement(centers, 1.0)
    for face in arr.faces:
        if len(face.signature):
            assert face.diameter <= 2.0 + 2.0 * face.accuracy


def test_face_diameter_single_candidate_and_empty():
    arr = build_arrangement([P(0, 0)], 1.0, DomainSquare(side=4.0))
    single = ConfusableRegion(
        signature=Signature.of([0]), representative=P(0.1, 0.1), sample_points=np.array([[0.1, 0.1]])
    )
    assert face_diameter(single, arr) == 0.0
    empty = ConfusableRegion(signature=Signature.of([0]), representative=P(0.1, 0.1))
    with pytest.raises(EmptyFace):
        face_diameter(empty, arr)


def test_clipped_arrangement_has_finite_empty_face():
    arr = build_arrangement([P(0.5, 0.5)], 0.2, DomainSquare(side=1.0))
    outside = arr.face_for(Signature())
    assert math.isfinite(outside.diameter)
    assert outside.diameter == pytest.approx(math.sqrt(2.0))


def test_sampling_oracle_examples():
    empty = signatures_via_sampling([], 1.0, DomainSquare(side=1.0), 0.1)
    assert set(empty.samples) == {()}
    R = 0.2
    one = signatures_via_sampling([P(0.5, 0.5)], R, DomainSquare(side=1.0), R / 50)
    assert set(one.samples) == {(), (0,)}


def test_sampling_grid_cap():
    with pytest.raises(GridTooLarge):
        sampling_grid(Box(xmin=0, ymin=0, xmax=1, ymax=1), 1e-3, max_cells=1000)


def test_sampling_grid_is_offset():
    pts = sampling_grid(Box(xmin=0, ymin=0, xmax=1, ymax=1), 0.1)
    assert pts.min() > 0.0
    assert not np.any(np.isclose(pts[:, 0] % 0.1, 0.0))


def test_duality_sampling_never_exceeds_faces(rng):
    domain = DomainSquare(side=1.0)
    R = 0.3
    for _ in range(50):
        n = int(rng.integers(1, 9))
        centers = rng.uniform(0.2, 0.8, size=(n, 2))
        analytic = build_arrangement(centers, R, domain, compute_diameters=False)
        sampled = signatures_via_sampling(centers, R, domain, R / 200)
        assert len(sampled) <= analytic.face_count
        assert set(sampled.samples) <= {f.signature.members for f in analytic.faces}


def test_well_separated_faces_are_all_sampled():
    centers = np.array([[0.4, 0.5], [0.6, 0.5]])
    domain = DomainSquare(side=1.0)
    analytic = build_arrangement(centers, 0.2, domain, compute_diameters=False)
    sampled = signatures_via_sampling(centers, 0.2, domain, 0.2 / 50)
    assert len(sampled) == analytic.face_count == 4


def test_grid_colander_sampling_vs_analytic(grid_colander, grid_spec):
    arr = build_arrangement(grid_colander, grid_spec.R, grid_spec.domain, compute_diameters=False)
    sampled = signatures_via_sampling(grid_colander, grid_spec.R, grid_spec.domain, grid_spec.epsilon / 10)
    assert set(sampled.samples) <= {f.signature.members for f in arr.faces}
    assert len(sampled) <= arr.face_count


def test_degenerate_inputs():
    with pytest.raises(DegenerateInput):
        build_arrangement([P(0, 0), P(0, 0)], 1.0)
    cap = get_settings().max_anchors
    with pytest.raises(TooManyAnchors):
        build_arrangement(np.zeros((cap + 1, 2)), 1.0)


def test_arrangement_export():
    doc = arrangement_to_dict(build_arrangement([P(0, 0)], 1.0))
    assert doc["radius"] == 1.0
    assert doc["disks"] == [{"x": 0.0, "y": 0.0}]
    diameters = {tuple(f["signature"]): f["diameter"] for f in doc["faces"]}
    assert diameters[()] is None
    assert diameters[(0,)] == pytest.approx(2.0, abs=0.05)


def test_sampling_usually_finds_every_face(rng):
    domain = DomainSquare(side=1.0)
    R = 0.3
    equal = 0
    for _ in range(50):
        n = int(rng.integers(1, 9))
        centers = rng.uniform(0.2, 0.8, size=(n, 2))
        analytic = build_arrangement(centers, R, domain, compute_diameters=False)
        sampled = signatures_via_sampling(centers, R, domain, R / 400)
        equal += len(sampled) == analytic.face_count
    # faces thinner than the pitch are missed by the sampler only
    assert equal >= 45
