import numpy as np
import pytest

from matchseg.core import PixelMask
from matchseg.errors import DimMismatch
from matchseg.metrics import boundary_f_measure, j_and_f, miou


def _rect(h, w, r0, c0, rh, rw):
    bits = np.zeros((h, w), dtype=bool)
    bits[r0:r0 + rh, c0:c0 + rw] = True
    return PixelMask(bits)


class TestMiou:
    def test_identical(self):
        m = _rect(10, 10, 2, 2, 4, 4)
        assert miou([m], [m]) == 1.0

    def test_disjoint(self):
        a = _rect(10, 10, 0, 0, 3, 3)
        b = _rect(10, 10, 6, 6, 3, 3)
        assert miou([a], [b]) == 0.0

    def test_half_overlap_rectangles(self):
        # areas 2 and 2, overlap 1 => IoU 1/3
        a = _rect(4, 4, 0, 0, 1, 2)
        b = _rect(4, 4, 0, 1, 1, 2)
        assert miou([a], [b]) == pytest.approx(1 / 3)

    def test_empty_pair_counts_as_one(self):
        assert miou([PixelMask.empty(5, 5)], [PixelMask.empty(5, 5)]) == 1.0

    def test_self_miou_is_one_for_any_list(self):
        rng = np.random.default_rng(0)
        masks = [PixelMask(rng.random((6, 6)) > 0.5) for _ in range(4)]
        assert miou(masks, masks) == 1.0

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            miou([PixelMask.empty(4, 4)], [PixelMask.empty(5, 5)])
        with pytest.raises(DimMismatch):
            miou([PixelMask.empty(4, 4)], [])


class TestBoundaryF:
    def test_perfect(self):
        m = _rect(20, 20, 5, 5, 8, 8)
        assert boundary_f_measure(m, m) == 1.0

    def test_empty_vs_nonempty_is_zero(self):
        assert boundary_f_measure(PixelMask.empty(20, 20), _rect(20, 20, 5, 5, 8, 8)) == 0.0

    def test_one_pixel_shift_within_tolerance(self):
        a = _rect(30, 30, 5, 5, 10, 10)
        b = _rect(30, 30, 5, 6, 10, 10)
        assert boundary_f_measure(a, b) == 1.0

    def test_far_shift_degrades(self):
        a = _rect(40, 40, 2, 2, 6, 6)
        b = _rect(40, 40, 2, 22, 6, 6)
        assert boundary_f_measure(a, b) == 0.0

    def test_custom_tolerance(self):
        a = _rect(30, 30, 5, 5, 10, 10)
        b = _rect(30, 30, 5, 9, 10, 10)
        assert boundary_f_measure(a, b, tolerance_px=1) < 1.0
        assert boundary_f_measure(a, b, tolerance_px=6) == 1.0


class TestJandF:
    def test_perfect_sequence(self):
        seq = [_rect(20, 20, 3, 3, 9, 9), _rect(20, 20, 4, 4, 9, 9)]
        assert j_and_f(seq, seq) == (1.0, 1.0, 1.0)

    def test_empty_prediction_vs_nonempty_gt(self):
        gt = [_rect(20, 20, 3, 3, 9, 9)]
        pred = [PixelMask.empty(20, 20)]
        assert j_and_f(pred, gt) == (0.0, 0.0, 0.0)

    def test_shifted_square_f_perfect_j_not(self):
        gt = [_rect(30, 30, 5, 5, 10, 10)]
        pred = [_rect(30, 30, 5, 6, 10, 10)]
        j, f, jf = j_and_f(pred, gt)
        assert f == 1.0
        assert j < 1.0
        assert jf == pytest.approx((j + f) / 2)

    def test_length_mismatch(self):
        with pytest.raises(DimMismatch):
            j_and_f([PixelMask.empty(4, 4)], [])
