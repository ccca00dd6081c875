"""End-to-end one-shot pipeline: match, prompt, segment, select, merge."""

from __future__ import annotations

from dataclasses import dataclass

from .config import RunConfig
from .core import (
    FeatureMap,
    PatchPoint,
    PixelMask,
    downsample_mask_to_grid,
    patch_to_pixel,
)
from .emd import proposal_emd
from .errors import EmptyMatch, EmptyResult
from .matching import bidirectional_match, forward_only_match, reverse_only_match
from .proposals import ProposalScore, combine_score, purity_coverage, select_and_merge
from .rng import derive_seed
from .sampling import kmeans_pp, sample_prompt_groups
from .segmenter import SegmentRequest


@dataclass(frozen=True)
class ProposalRecord:
    mask: PixelMask
    score: ProposalScore
    source: str  # prompt group kind that elicited the mask
    confidence: float


@dataclass(frozen=True)
class PipelineResult:
    mask: PixelMask
    kept: list[int]
    proposals: list[ProposalRecord]
    matched_count: int
    raw_score: float  # best kept score; 0.0 when nothing was kept


def run_matching(ref: FeatureMap, target: FeatureMap, ref_patches: set[PatchPoint],
                 mode: str) -> list[PatchPoint]:
    """Matched target patches under the configured strategy."""
    if mode == "bidirectional":
        matched, _ = bidirectional_match(ref, target, ref_patches)
        return matched
    if mode == "forward":
        return forward_only_match(ref, target, ref_patches)
    if mode == "reverse":
        return reverse_only_match(ref, target, ref_patches)
    raise ValueError(f"unknown matching mode {mode!r}")


def mask_to_patches(mask: PixelMask, grid: FeatureMap, threshold: float) -> set[PatchPoint]:
    """Grid projection of a mask, relaxing to any-overlap if the threshold
    leaves nothing (tiny masks)."""
    try:
        return downsample_mask_to_grid(mask, grid.height, grid.width,
                                       grid.stride_px, threshold)
    except EmptyResult:
        return downsample_mask_to_grid(mask, grid.height, grid.width,
                                       grid.stride_px, 1e-9)


def propose_and_select(
    matched: list[PatchPoint],
    score_ref: FeatureMap,
    score_ref_patches: set[PatchPoint],
    target: FeatureMap,
    image_id: str,
    segmenter,
    cfg: RunConfig,
    image_hw: tuple[int, int] | None = None,
) -> PipelineResult:
    """Prompt the segmenter from the matched points and merge the best masks.

    ``score_ref``/``score_ref_patches`` provide the features the transport
    distance compares against (for tracking this is the pinned reference).
    """
    if image_hw is None:
        image_hw = (target.height * target.stride_px, target.width * target.stride_px)

    k = min(cfg.sampler.cluster_count, len(matched))
    pixels = [patch_to_pixel(p, target.stride_px, *image_hw) for p in matched]
    clusters = kmeans_pp(pixels, k, seed=derive_seed(cfg.seed, "kmeans"),
                         max_iter=cfg.sampler.kmeans_max_iter)
    groups = sample_prompt_groups(
        matched, clusters, cfg.sampler, seed=derive_seed(cfg.seed, "sampler"),
        stride_px=target.stride_px, grid_h=target.height, grid_w=target.width,
    )

    proposals: list[ProposalRecord] = []
    score_cache: dict[bytes, ProposalScore] = {}
    for group in groups:
        if group.kind == "box":
            request = SegmentRequest(image_id=image_id, box=group.box, multimask=True)
        else:
            points = tuple((p.x, p.y, 1) for p in group.points)
            request = SegmentRequest(image_id=image_id, points=points, multimask=True)
        response = segmenter.segment(request)
        for mask, confidence in zip(response.masks, response.confidences):
            if mask.area == 0:
                continue
            key = mask.bits.tobytes()
            score = score_cache.get(key)
            if score is None:
                prop_patches = mask_to_patches(mask, target, cfg.grid_threshold)
                emd_value = proposal_emd(
                    score_ref, target, score_ref_patches, prop_patches,
                    cap=cfg.select.emd_support_cap,
                    seed=derive_seed(cfg.seed, "emd-subsample"),
                )
                purity, coverage = purity_coverage(matched, mask, target.stride_px)
                score = ProposalScore(
                    emd=emd_value,
                    purity=purity,
                    coverage=coverage,
                    score=combine_score(emd_value, purity, coverage,
                                        cfg.select.alpha, cfg.select.beta, cfg.select.lam),
                )
                score_cache[key] = score
            proposals.append(ProposalRecord(mask=mask, score=score,
                                            source=group.kind, confidence=confidence))

    if not proposals:
        return PipelineResult(mask=PixelMask.empty(*image_hw), kept=[],
                              proposals=[], matched_count=len(matched), raw_score=0.0)

    merged, kept = select_and_merge([(p.mask, p.score) for p in proposals], cfg.select)
    if not kept:
        merged = PixelMask.empty(*image_hw)
    raw_score = max((proposals[i].score.score for i in kept), default=0.0)
    return PipelineResult(mask=merged, kept=kept, proposals=proposals,
                          matched_count=len(matched), raw_score=raw_score)


def run_pipeline(
    ref: FeatureMap,
    ref_mask: PixelMask,
    target: FeatureMap,
    image_id: str,
    segmenter,
    cfg: RunConfig,
    image_hw: tuple[int, int] | None = None,
) -> PipelineResult:
    """One-shot segmentation of a target given one reference image+mask.

    A target with no surviving correspondence yields an empty mask rather
    than an error, mirroring how a missing class should be reported.
    """
    if image_hw is None:
        image_hw = (target.height * target.stride_px, target.width * target.stride_px)
    ref_patches = downsample_mask_to_grid(
        ref_mask, ref.height, ref.width, ref.stride_px, cfg.grid_threshold
    )
    try:
        matched = run_matching(ref, target, ref_patches, cfg.matching)
    except EmptyMatch:
        return PipelineResult(mask=PixelMask.empty(*image_hw), kept=[],
                              proposals=[], matched_count=0, raw_score=0.0)
    return propose_and_select(matched, ref, ref_patches, target, image_id,
                              segmenter, cfg, image_hw=image_hw)
