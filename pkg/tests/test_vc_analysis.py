import itertools
import math

import numpy as np
import pytest

from app.core.exceptions import TooManyPoints
from app.core.vc_analysis import (
    _Normalized,
    _separating_disk,
    can_realize_subset,
    distinct_signature_count,
    is_shattered,
    pattern_table,
    sauer_g,
    vc_dimension_estimate,
)
from app.models.schemas import RangeFamily

SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
TRIANGLE = np.array([[0.0, 0.0], [0.4, 0.6], [0.8, 0.2]])


def members_of_disk(pts, witness, rel=1e-9):
    c = np.array(witness.center.as_tuple())
    d = np.hypot(pts[:, 0] - c[0], pts[:, 1] - c[1])
    slack = rel * max(witness.radius, 1.0)
    inside = set(np.flatnonzero(d <= witness.radius + slack).tolist())
    strictly_inside = set(np.flatnonzero(d <= witness.radius - slack).tolist())
    return inside, strictly_inside


def members_of_square(pts, witness):
    c = np.array(witness.center.as_tuple())
    h = 0.5 * witness.side * (1.0 + 1e-12)
    inside = (np.abs(pts[:, 0] - c[0]) <= h) & (np.abs(pts[:, 1] - c[1]) <= h)
    return tuple(np.flatnonzero(inside).tolist())


class TestSauer:
    @pytest.mark.parametrize("n,d,expected", [(3, 3, 8), (4, 3, 15), (10, 3, 176), (2, 3, 4), (0, 3, 1), (5, 0, 1)])
    def test_values(self, n, d, expected):
        assert sauer_g(n, d) == expected

    def test_negative_arguments(self):
        with pytest.raises(ValueError):
            sauer_g(-1, 3)


class TestRealizability:
    def test_square_diagonal_is_not_cut_out_by_a_disk(self):
        ok, witness = can_realize_subset(SQUARE, [0, 2], RangeFamily.all_disks())
        assert not ok
        assert witness is None

    def test_square_side_is_cut_out_by_a_disk(self):
        ok, witness = can_realize_subset(SQUARE, [0, 1], RangeFamily.all_disks())
        assert ok
        inside, strictly = members_of_disk(SQUARE, witness)
        assert {0, 1} <= inside
        assert {2, 3}.isdisjoint(inside)
        assert strictly <= {0, 1}

    def test_subset_order_and_duplicates_do_not_matter(self):
        ok, witness = can_realize_subset(TRIANGLE, [2, 0, 2], RangeFamily.all_disks())
        assert ok
        assert witness.subset == (0, 2)

    def test_out_of_range_index(self):
        with pytest.raises(IndexError):
            can_realize_subset(TRIANGLE, [3], RangeFamily.all_disks())

    def test_too_many_points(self, rng):
        with pytest.raises(TooManyPoints):
            can_realize_subset(rng.uniform(size=(17, 2)), [0], RangeFamily.all_disks())

    def test_candidate_table_agrees_with_linear_program(self, rng):
        for _ in range(5):
            pts = rng.uniform(0, 1, size=(5, 2))
            table = pattern_table(pts, RangeFamily.all_disks())
            norm = _Normalized(pts)
            realizable = {
                subset
                for size in range(6)
                for subset in itertools.combinations(range(5), size)
                if _separating_disk(norm, subset) is not None
            }
            assert set(table) == realizable

    def test_table_witnesses_realize_their_subsets(self, rng):
        pts = rng.uniform(0, 1, size=(6, 2))
        for subset, witness in pattern_table(pts, RangeFamily.all_disks()).items():
            if not subset or witness.half_plane:
                continue
            inside, strictly = members_of_disk(pts, witness, rel=1e-6)
            assert strictly <= set(subset) <= inside


class TestShattering:
    def test_triangle_is_shattered_by_disks(self):
        result = is_shattered(TRIANGLE, RangeFamily.all_disks())
        assert result.shattered
        assert len(result.witness_ranges) == 8
        assert result.missing_subset is None

    def test_square_is_not_shattered_by_disks(self):
        result = is_shattered(SQUARE, RangeFamily.all_disks())
        assert not result.shattered
        assert result.missing_subset == (0, 2)

    def test_triangle_is_shattered_by_unit_disks(self):
        assert is_shattered(0.5 * TRIANGLE, RangeFamily.equal_disks(1.0)).shattered

    def test_points_too_far_apart_for_unit_disks(self):
        pts = np.array([[0.0, 0.0], [5.0, 0.0]])
        result = is_shattered(pts, RangeFamily.equal_disks(1.0))
        assert not result.shattered
        assert result.missing_subset == (0, 1)

    def test_triangle_is_shattered_by_square_translates(self):
        fam = RangeFamily.square_translates(1.0)
        result = is_shattered(TRIANGLE, fam)
        assert result.shattered
        for witness in result.witness_ranges:
            assert members_of_square(TRIANGLE, witness) == witness.subset

    def test_empty_set_is_shattered(self):
        result = is_shattered(np.empty((0, 2)), RangeFamily.all_disks())
        assert result.shattered
        assert [w.subset for w in result.witness_ranges] == [()]


class TestDiskRangeSpace:
    def test_random_triples_are_shattered(self, rng):
        fam = RangeFamily.all_disks()
        checked = 0
        while checked < 50:
            pts = rng.uniform(0, 1, size=(3, 2))
            a, b, c = pts
            if abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])) < 1e-3:
                continue
            assert is_shattered(pts, fam).shattered
            checked += 1

    def test_no_four_point_set_is_shattered(self, rng):
        fam = RangeFamily.all_disks()
        adversarial = [
            SQUARE,
            np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 0.9], [0.5, 0.3]]),
            np.array([[0.0, 0.0], [1.0, 0.1], [2.0, 0.0], [1.0, -0.1]]),
            np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]]),
        ]
        for t in range(500):
            pts = adversarial[t] if t < len(adversarial) else rng.uniform(0, 1, size=(4, 2))
            assert not is_shattered(pts, fam).shattered

    def test_sauer_bound_on_random_sets(self, rng):
        fam = RangeFamily.all_disks()
        for _ in range(100):
            n = int(rng.integers(1, 13))
            pts = rng.uniform(0, 1, size=(n, 2))
            assert distinct_signature_count(pts, fam) <= sauer_g(n, 3)


class TestPatternCounts:
    def test_counts_respect_sauer_bound(self, rng):
        for n in range(1, 9):
            pts = rng.uniform(0, 1, size=(n, 2))
            count = distinct_signature_count(pts, RangeFamily.all_disks())
            assert count <= min(2 ** n, sauer_g(n, 3))

    def test_single_point(self):
        assert distinct_signature_count(np.array([[0.3, 0.3]]), RangeFamily.all_disks()) == 2

    def test_table_is_sorted_by_size(self):
        keys = list(pattern_table(TRIANGLE, RangeFamily.all_disks()))
        assert keys == sorted(keys, key=lambda s: (len(s), s))

    def test_empty_set(self):
        assert list(pattern_table(np.empty((0, 2)), RangeFamily.all_disks())) == [()]

    def test_probe_sweep_only_adds_patterns(self, rng):
        pts = rng.uniform(0, 1, size=(6, 2))
        fam = RangeFamily.equal_disks(0.4)
        plain = set(pattern_table(pts, fam))
        swept = set(pattern_table(pts, fam, probe_density=20))
        assert plain <= swept
        assert len(swept) <= sauer_g(6, 3)

    def test_equal_disk_patterns_are_arrangement_faces(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0]])
        assert set(pattern_table(pts, RangeFamily.equal_disks(1.0))) == {(), (0,), (1,), (0, 1)}

    def test_cap(self, rng):
        with pytest.raises(TooManyPoints):
            pattern_table(rng.uniform(size=(21, 2)), RangeFamily.all_disks())


class TestEstimate:
    def test_all_disks(self):
        assert vc_dimension_estimate(RangeFamily.all_disks(), n_max=5, trials=20, seed=1) == 3

    def test_equal_disks(self):
        assert vc_dimension_estimate(RangeFamily.equal_disks(1.0), n_max=4, trials=20, seed=1) == 3

    def test_square_translates(self):
        assert vc_dimension_estimate(RangeFamily.square_translates(1.0), n_max=4, trials=20, seed=1) == 3

    def test_never_exceeds_n_max(self):
        assert vc_dimension_estimate(RangeFamily.all_disks(), n_max=2, trials=5) == 2

    @pytest.mark.parametrize("n_max,trials", [(0, 10), (9, 10), (3, 0)])
    def test_argument_checks(self, n_max, trials):
        with pytest.raises(ValueError):
            vc_dimension_estimate(RangeFamily.all_disks(), n_max=n_max, trials=trials)

    def test_family_needs_parameters(self):
        with pytest.raises(ValueError):
            RangeFamily(kind="equal-disks")
        assert math.isclose(RangeFamily.equal_disks(2.0).radius, 2.0)
