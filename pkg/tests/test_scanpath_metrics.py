import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uigaze.core import Fixation, Scanpath
from uigaze.errors import EmptyScanpath, NoRecurrences, ScanpathShorterThanK
from uigaze.scanpath_metrics import (
    RecurrenceMatrix,
    UNIT_DIAGONAL,
    corm,
    det,
    dtw,
    eyenalysis,
    rec,
    recurrence_matrix,
    tde,
)

from oracles import dtw_bruteforce, eyenalysis_bruteforce


def scanpath(points, image_id="img", viewer_id="v"):
    fixations = tuple(
        Fixation(x=x, y=y, onset_s=0.25 * i, duration_s=0.2)
        for i, (x, y) in enumerate(points)
    )
    return Scanpath(image_id, viewer_id, fixations)


def random_points(rng, n):
    return [(rng.uniform(0, 1), rng.uniform(0, 1)) for _ in range(n)]


# --- DTW ------------------------------------------------------------------------


class TestDtw:
    def test_identical_paths(self):
        pts = [(0.1, 0.2), (0.4, 0.4), (0.9, 0.1)]
        assert dtw(scanpath(pts), scanpath(pts)) == 0.0

    def test_single_forced_alignment(self):
        assert dtw(scanpath([(0.0, 0.0)]), scanpath([(0.3, 0.4)])) == pytest.approx(0.5)

    def test_insert_costs_nearest_match(self):
        a = scanpath([(0.0, 0.0), (0.2, 0.0)])
        b = scanpath([(0.0, 0.0), (0.1, 0.0), (0.2, 0.0)])
        assert dtw(a, b) == pytest.approx(0.1)
        assert dtw(a, b) == dtw_bruteforce([(0.0, 0.0), (0.2, 0.0)],
                                           [(0.0, 0.0), (0.1, 0.0), (0.2, 0.0)])

    def test_equals_bruteforce_enumeration(self):
        rng = np.random.RandomState(42)
        for _ in range(100):
            a = random_points(rng, rng.randint(1, 7))
            b = random_points(rng, rng.randint(1, 7))
            assert dtw(scanpath(a), scanpath(b)) == dtw_bruteforce(a, b)

    def test_symmetry(self):
        rng = np.random.RandomState(1)
        for _ in range(20):
            a = scanpath(random_points(rng, 5))
            b = scanpath(random_points(rng, 8))
            assert dtw(a, b) == dtw(b, a)

    def test_empty_rejected(self):
        with pytest.raises(EmptyScanpath):
            dtw(scanpath([]), scanpath([(0.1, 0.1)]))


# --- TDE -------------------------------------------------------------------------


class TestTde:
    def test_identical_paths(self):
        pts = [(0.1, 0.1), (0.5, 0.5), (0.9, 0.9), (0.2, 0.8)]
        for k in (1, 2, 3, 4):
            assert tde(scanpath(pts), scanpath(pts), k=k) == 0.0

    def test_parallel_offset_windows(self):
        # one window each; flattened 2k-vector distance sqrt(2 * 0.1^2),
        # divided by k = 2
        a = scanpath([(0.0, 0.0), (0.0, 0.0)])
        b = scanpath([(0.1, 0.0), (0.1, 0.0)])
        expected = math.sqrt(2 * 0.1**2) / 2
        assert tde(a, b, k=2) == pytest.approx(expected, rel=1e-12)

    def test_window_oracle(self):
        rng = np.random.RandomState(9)
        a = random_points(rng, 6)
        b = random_points(rng, 5)
        k = 3

        def windows(pts):
            return [pts[i : i + k] for i in range(len(pts) - k + 1)]

        def flat_dist(wa, wb):
            total = 0.0
            for (xa, ya), (xb, yb) in zip(wa, wb):
                total += (xa - xb) ** 2 + (ya - yb) ** 2
            return math.sqrt(total) / k

        expected = np.mean(
            [min(flat_dist(wa, wb) for wb in windows(b)) for wa in windows(a)]
        )
        assert tde(scanpath(a), scanpath(b), k=k) == pytest.approx(expected, rel=1e-12)

    def test_k_larger_than_path(self):
        with pytest.raises(ScanpathShorterThanK):
            tde(scanpath([(0.1, 0.1)]), scanpath([(0.2, 0.2), (0.3, 0.3)]), k=2)

    def test_asymmetric_by_design(self):
        a = scanpath([(0.0, 0.0), (0.1, 0.0), (0.2, 0.0), (0.9, 0.9)])
        b = scanpath([(0.0, 0.0), (0.1, 0.0), (0.2, 0.0)])
        assert tde(a, b, k=2) != tde(b, a, k=2)


# --- Eyenalysis --------------------------------------------------------------------


class TestEyenalysis:
    def test_identical_paths(self):
        pts = [(0.3, 0.3), (0.6, 0.1)]
        assert eyenalysis(scanpath(pts), scanpath(pts)) == 0.0

    def test_hand_example(self):
        a = scanpath([(0.0, 0.0), (0.1, 0.0)])
        b = scanpath([(0.0, 0.0)])
        assert eyenalysis(a, b) == pytest.approx(0.1 / 3, rel=1e-12)

    def test_singletons_distance_apart(self):
        a = scanpath([(0.2, 0.2)])
        b = scanpath([(0.2, 0.7)])
        assert eyenalysis(a, b) == pytest.approx(0.5)

    def test_equals_double_mapping_oracle(self):
        rng = np.random.RandomState(5)
        for _ in range(50):
            a = random_points(rng, rng.randint(1, 9))
            b = random_points(rng, rng.randint(1, 9))
            assert eyenalysis(scanpath(a), scanpath(b)) == pytest.approx(
                eyenalysis_bruteforce(a, b), abs=1e-12
            )


# --- recurrence family ---------------------------------------------------------------


class TestRecurrence:
    def test_coincident_far_points_identity_diagonal(self):
        pts = [(0.1, 0.1), (0.5, 0.5), (0.9, 0.9)]
        m = recurrence_matrix(scanpath(pts), scanpath(pts))
        assert np.array_equal(m.cells, np.eye(3, dtype=bool))

    def test_all_within_threshold(self):
        pts = [(0.5, 0.5), (0.51, 0.5), (0.5, 0.51)]
        m = recurrence_matrix(scanpath(pts), scanpath(pts))
        assert m.cells.all()
        assert rec(m) == 100.0

    def test_mixed_two_by_two_by_hand(self):
        # distances: (0,0)-(0,0) = 0, (0,0)-(0.5,0) = 0.5,
        # (0.06,0)-(0,0) = 0.06, (0.06,0)-(0.5,0) = 0.44; threshold ~ 0.0707
        a = scanpath([(0.0, 0.0), (0.06, 0.0)])
        b = scanpath([(0.0, 0.0), (0.5, 0.0)])
        m = recurrence_matrix(a, b)
        assert m.threshold == pytest.approx(0.05 * UNIT_DIAGONAL)
        assert m.cells.tolist() == [[True, False], [True, False]]
        assert rec(m) == pytest.approx(50.0)

    def test_truncates_to_shorter_length(self):
        a = scanpath([(0.1, 0.1), (0.2, 0.2), (0.9, 0.9)])
        b = scanpath([(0.1, 0.1), (0.2, 0.2)])
        assert recurrence_matrix(a, b).n == 2

    def test_rec_percentages(self):
        all_false = RecurrenceMatrix(np.zeros((3, 3), dtype=bool), threshold=0.1)
        assert rec(all_false) == 0.0
        three_true = RecurrenceMatrix(
            np.array([[True, True], [True, False]]), threshold=0.1
        )
        assert rec(three_true) == pytest.approx(75.0)


class TestDet:
    def test_diagonal_run_plus_isolated_cell(self):
        cells = np.zeros((3, 3), dtype=bool)
        cells[0, 0] = cells[1, 1] = True  # run of length 2 on the main diagonal
        cells[0, 2] = True  # isolated
        m = RecurrenceMatrix(cells, threshold=0.1)
        assert det(m) == pytest.approx(100.0 * 2 / 3)

    def test_no_recurrences(self):
        m = RecurrenceMatrix(np.zeros((4, 4), dtype=bool), threshold=0.1)
        assert det(m) == 0.0

    def test_full_identity_diagonal(self):
        m = RecurrenceMatrix(np.eye(5, dtype=bool), threshold=0.1)
        assert det(m) == 100.0

    def test_min_line_three(self):
        cells = np.zeros((4, 4), dtype=bool)
        cells[0, 0] = cells[1, 1] = True
        m = RecurrenceMatrix(cells, threshold=0.1)
        assert det(m, min_line=3) == 0.0
        cells[2, 2] = True
        m = RecurrenceMatrix(cells, threshold=0.1)
        assert det(m, min_line=3) == 100.0

    def test_off_diagonal_runs_count(self):
        cells = np.zeros((3, 3), dtype=bool)
        cells[0, 1] = cells[1, 2] = True  # run on the +1 diagonal
        m = RecurrenceMatrix(cells, threshold=0.1)
        assert det(m) == 100.0


class TestCorm:
    def test_main_diagonal_only(self):
        m = RecurrenceMatrix(np.eye(4, dtype=bool), threshold=0.1)
        assert corm(m) == 0.0

    def test_single_corner_cell_max_lag(self):
        cells = np.zeros((5, 5), dtype=bool)
        cells[0, 4] = True
        m = RecurrenceMatrix(cells, threshold=0.1)
        assert corm(m) == pytest.approx(100.0)

    def test_opposite_lags_cancel(self):
        cells = np.array([[False, True], [True, False]])
        m = RecurrenceMatrix(cells, threshold=0.1)
        assert corm(m) == 0.0

    def test_no_recurrences_error(self):
        m = RecurrenceMatrix(np.zeros((2, 2), dtype=bool), threshold=0.1)
        with pytest.raises(NoRecurrences):
            corm(m)


# --- shared invariants -----------------------------------------------------------------

finite_coord = st.floats(0.0, 1.0, allow_nan=False, allow_infinity=False)
point_lists = st.lists(st.tuples(finite_coord, finite_coord), min_size=1, max_size=8)


class TestInvariants:
    @settings(max_examples=50, deadline=None)
    @given(point_lists, point_lists)
    def test_dtw_symmetric_nonnegative(self, a, b):
        value = dtw(scanpath(a), scanpath(b))
        assert value >= 0.0
        assert value == dtw(scanpath(b), scanpath(a))

    @settings(max_examples=50, deadline=None)
    @given(point_lists)
    def test_self_distances_zero(self, pts):
        sp = scanpath(pts)
        assert dtw(sp, sp) == 0.0
        assert eyenalysis(sp, sp) == 0.0
        assert tde(sp, sp, k=1) == 0.0

    @settings(max_examples=30, deadline=None)
    @given(point_lists, point_lists, st.floats(-0.3, 0.3), st.floats(-0.3, 0.3))
    def test_rigid_translation_invariance(self, a, b, sx, sy):
        def shift(pts):
            return [(x + sx, y + sy) for x, y in pts]

        base_dtw = dtw(np.array(a), np.array(b))
        shifted_dtw = dtw(np.array(shift(a)), np.array(shift(b)))
        assert shifted_dtw == pytest.approx(base_dtw, abs=1e-9)
        assert eyenalysis(np.array(shift(a)), np.array(shift(b))) == pytest.approx(
            eyenalysis(np.array(a), np.array(b)), abs=1e-9
        )
        base_rec = rec(recurrence_matrix(np.array(a), np.array(b)))
        shifted_rec = rec(recurrence_matrix(np.array(shift(a)), np.array(shift(b))))
        assert base_rec == shifted_rec

    def test_percentage_ranges(self):
        rng = np.random.RandomState(17)
        for _ in range(50):
            a = scanpath(random_points(rng, rng.randint(2, 10)))
            b = scanpath(random_points(rng, rng.randint(2, 10)))
            m = recurrence_matrix(a, b, threshold_frac=0.3)
            assert 0.0 <= rec(m) <= 100.0
            assert 0.0 <= det(m) <= 100.0
            if m.cells.any():
                assert -100.0 <= corm(m) <= 100.0
