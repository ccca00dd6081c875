import numpy as np
import pytest

from matchseg.config import SelectConfig
from matchseg.core import PatchPoint, PixelMask
from matchseg.errors import ZeroArea
from matchseg.proposals import (
    ProposalScore,
    combine_score,
    purity_coverage,
    select_and_merge,
)


def _mask_from_cells(cells, grid=(4, 4), stride=4):
    bits = np.zeros((grid[0] * stride, grid[1] * stride), dtype=bool)
    for r, c in cells:
        bits[r * stride:(r + 1) * stride, c * stride:(c + 1) * stride] = True
    return PixelMask(bits)


class TestPurityCoverage:
    def test_perfect_proposal(self):
        matched = [PatchPoint(0, 0), PatchPoint(1, 1), PatchPoint(2, 2)]
        proposal = _mask_from_cells([(0, 0), (1, 1), (2, 2)])
        purity, coverage = purity_coverage(matched, proposal, stride_px=4)
        assert purity == pytest.approx(1.0)
        assert coverage == pytest.approx(1.0)

    def test_disjoint_proposal(self):
        matched = [PatchPoint(0, 0)]
        proposal = _mask_from_cells([(3, 3)])
        assert purity_coverage(matched, proposal, stride_px=4) == (0.0, 0.0)

    def test_8_cells_4_of_10_points(self):
        matched = [PatchPoint(0, c) for c in range(4)] + [PatchPoint(3, c) for c in range(4)]
        matched += [PatchPoint(2, 0), PatchPoint(2, 1)]
        assert len(matched) == 10
        proposal = _mask_from_cells([(0, 0), (0, 1), (0, 2), (0, 3),
                                     (1, 0), (1, 1), (1, 2), (1, 3)])
        purity, coverage = purity_coverage(matched, proposal, stride_px=4)
        assert purity == pytest.approx(4 / 8)
        assert coverage == pytest.approx(4 / 10)

    def test_zero_area(self):
        with pytest.raises(ZeroArea):
            purity_coverage([PatchPoint(0, 0)], PixelMask.empty(4, 4), stride_px=4)

    def test_matches_brute_force_on_randoms(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            cells = {(int(r), int(c)) for r, c in rng.integers(0, 4, size=(6, 2))}
            matched = [PatchPoint(int(r), int(c))
                       for r, c in rng.integers(0, 4, size=(8, 2))]
            matched = list(dict.fromkeys(matched))
            proposal = _mask_from_cells(sorted(cells))
            purity, coverage = purity_coverage(matched, proposal, stride_px=4)
            inside = sum(1 for p in matched if (p.row, p.col) in cells)
            assert coverage == pytest.approx(inside / len(matched))
            assert purity == pytest.approx(inside / len(cells))


class TestCombineScore:
    def test_emd_only_strictly_decreasing(self):
        scores = [combine_score(e, 0.5, 0.5, alpha=1.0, beta=0.0, lam=0.0)
                  for e in (0.0, 0.2, 0.4, 0.9)]
        assert scores == sorted(scores, reverse=True)
        assert all(a > b for a, b in zip(scores, scores[1:]))

    def test_purity_linear_when_alpha_zero_lam_zero(self):
        got = [combine_score(0.3, p, 0.0, alpha=0.0, beta=2.0, lam=0.0)
               for p in (0.0, 0.5, 1.0)]
        assert got == [0.0, 1.0, 2.0]  # coverage**0 == 1 even at coverage 0

    def test_formula(self):
        assert combine_score(0.2, 0.5, 0.25, alpha=0.4, beta=1.0, lam=1.0) == pytest.approx(
            0.4 * 0.8 + 0.5 * 0.25
        )


def _scored(mask, emd, purity, coverage, cfg=None):
    cfg = cfg or SelectConfig()
    return mask, ProposalScore(
        emd=emd, purity=purity, coverage=coverage,
        score=combine_score(emd, purity, coverage, cfg.alpha, cfg.beta, cfg.lam),
    )


class TestSelectAndMerge:
    def test_single_survivor(self):
        mask = _mask_from_cells([(0, 0)])
        cfg = SelectConfig(emd_max=0.5, num_merged=2)
        final, kept = select_and_merge([_scored(mask, 0.1, 1.0, 1.0)], cfg)
        assert kept == [0]
        assert np.array_equal(final.bits, mask.bits)

    def test_all_fail_emd_threshold(self):
        mask = _mask_from_cells([(0, 0)])
        cfg = SelectConfig(emd_max=0.2)
        final, kept = select_and_merge([_scored(mask, 0.9, 1.0, 1.0)], cfg)
        assert kept == []
        assert final.area == 0

    def test_top_k_ordering(self):
        masks = [_mask_from_cells([(0, 0)]), _mask_from_cells([(1, 1)]),
                 _mask_from_cells([(2, 2)])]
        proposals = [_scored(masks[0], 0.1, 1.0, 1.0),
                     _scored(masks[1], 0.2, 1.0, 1.0),
                     _scored(masks[2], 0.3, 1.0, 1.0)]
        cfg = SelectConfig(num_merged=2)
        final, kept = select_and_merge(proposals, cfg)
        assert kept == [0, 1]
        assert np.array_equal(final.bits, masks[0].union(masks[1]).bits)

    def test_score_tie_broken_by_coverage(self):
        a = _mask_from_cells([(0, 0)])
        b = _mask_from_cells([(1, 1)])
        proposals = [
            (a, ProposalScore(emd=0.0, purity=1.0, coverage=0.2, score=0.7)),
            (b, ProposalScore(emd=0.0, purity=1.0, coverage=0.9, score=0.7)),
        ]
        _, kept = select_and_merge(proposals, SelectConfig(num_merged=1))
        assert kept == [1]

    def test_near_duplicates_skipped(self):
        base = _mask_from_cells([(0, 0), (0, 1), (1, 0), (1, 1)])
        dup = PixelMask(base.bits.copy())
        other = _mask_from_cells([(3, 3)])
        proposals = [_scored(base, 0.0, 1.0, 1.0), _scored(dup, 0.01, 1.0, 1.0),
                     _scored(other, 0.1, 1.0, 0.5)]
        _, kept = select_and_merge(proposals, SelectConfig(num_merged=2))
        assert kept == [0, 2]

    def test_every_kept_satisfies_thresholds(self):
        rng = np.random.default_rng(1)
        cfg = SelectConfig(emd_max=0.6, purity_min=0.1, coverage_min=0.2, num_merged=4)
        proposals = []
        for _ in range(20):
            cells = {(int(r), int(c)) for r, c in rng.integers(0, 4, size=(3, 2))}
            proposals.append(_scored(_mask_from_cells(sorted(cells)),
                                     float(rng.random()), float(rng.random()),
                                     float(rng.random()), cfg))
        _, kept = select_and_merge(proposals, cfg)
        for idx in kept:
            score = proposals[idx][1]
            assert score.emd <= cfg.emd_max
            assert score.purity >= cfg.purity_min
            assert score.coverage >= cfg.coverage_min

    def test_union_area_monotone_in_k(self):
        rng = np.random.default_rng(2)
        proposals = []
        for _ in range(12):
            cells = {(int(r), int(c)) for r, c in rng.integers(0, 4, size=(4, 2))}
            proposals.append(_scored(_mask_from_cells(sorted(cells)),
                                     float(rng.random()), float(rng.random()),
                                     float(rng.random())))
        areas = []
        for k in range(1, 8):
            final, _ = select_and_merge(proposals, SelectConfig(num_merged=k))
            areas.append(final.area)
        assert areas == sorted(areas)

    def test_top_k_caps_candidates(self):
        masks = [_mask_from_cells([(i % 4, i // 4)]) for i in range(6)]
        proposals = [_scored(m, 0.1 * i, 1.0, 1.0) for i, m in enumerate(masks)]
        cfg = SelectConfig(num_merged=6, top_k=2)
        _, kept = select_and_merge(proposals, cfg)
        assert kept == [0, 1]
