"""Mask-proposal scoring and top-k merging.

Each proposal is scored with three quantities: the transport distance
between the features inside the reference mask and inside the proposal
(emd), the matched-point density of the proposal in patch-cell units
(purity), and the fraction of all matched points the proposal captures
(coverage). The combined score is

    score = alpha * (1 - emd) + beta * purity * coverage**lam

Proposals failing any active threshold are dropped; survivors are
sorted by score and the top num_merged distinct masks are unioned.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import SelectConfig
from .core import PatchPoint, PixelMask, iou, patch_to_pixel
from .errors import ZeroArea


@dataclass(frozen=True)
class ProposalScore:
    emd: float
    purity: float
    coverage: float
    score: float


def combine_score(emd: float, purity: float, coverage: float,
                  alpha: float, beta: float, lam: float) -> float:
    # coverage**0 == 1 even at coverage 0, so lam = 0 disables the factor
    return alpha * (1.0 - emd) + beta * purity * coverage ** lam


def purity_coverage(matched: list[PatchPoint], proposal: PixelMask,
                    stride_px: int) -> tuple[float, float]:
    """Density and recall of the matched points w.r.t. one proposal.

    purity divides the in-proposal point count by the proposal area in
    patch-cell units (pixel area / stride^2); coverage divides it by the
    total matched-point count.
    """
    if not matched:
        raise ValueError("matched point set must be nonempty")
    area_px = proposal.area
    if area_px == 0:
        raise ZeroArea("proposal mask is empty")
    area_cells = area_px / float(stride_px * stride_px)

    inside = 0
    for p in matched:
        px = patch_to_pixel(p, stride_px, proposal.height_px, proposal.width_px)
        if proposal.bits[int(px.y), int(px.x)]:
            inside += 1
    return inside / area_cells, inside / len(matched)


def _passes(score: ProposalScore, cfg: SelectConfig) -> bool:
    if cfg.emd_max is not None and score.emd > cfg.emd_max:
        return False
    if cfg.purity_min is not None and score.purity < cfg.purity_min:
        return False
    if cfg.coverage_min is not None and score.coverage < cfg.coverage_min:
        return False
    return True


def select_and_merge(
    proposals: list[tuple[PixelMask, ProposalScore]],
    cfg: SelectConfig,
) -> tuple[PixelMask, list[int]]:
    """Filter by thresholds, rank by score, union the top masks.

    Returns the merged mask and the kept input indices in rank order.
    Near-duplicates (IoU > cfg.dedup_iou against an already kept mask)
    are skipped. With every proposal filtered the result is empty.
    """
    if not proposals:
        raise ValueError("proposal list must be nonempty")
    height, width = proposals[0][0].bits.shape

    survivors = [
        (idx, mask, score)
        for idx, (mask, score) in enumerate(proposals)
        if _passes(score, cfg)
    ]
    # ties: larger coverage first, then input order
    survivors.sort(key=lambda t: (-t[2].score, -t[2].coverage, t[0]))
    if cfg.top_k is not None:
        survivors = survivors[: cfg.top_k]

    kept: list[int] = []
    kept_masks: list[PixelMask] = []
    for idx, mask, _ in survivors:
        if len(kept) >= cfg.num_merged:
            break
        if any(iou(mask, prev) > cfg.dedup_iou for prev in kept_masks):
            continue
        kept.append(idx)
        kept_masks.append(mask)

    merged = PixelMask.empty(height, width)
    for mask in kept_masks:
        merged = merged.union(mask)
    return merged, kept
