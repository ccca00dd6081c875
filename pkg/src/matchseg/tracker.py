"""Semi-supervised video object segmentation on top of the one-shot pipeline.

Each tracked object keeps a small memory of (frame features, predicted
mask, score) entries. The given first-frame reference is pinned and
never evicted, so an object lost behind an occlusion can be re-acquired
later. When the memory is full, the unpinned entry with the lowest
time-decayed score is dropped. Matching pools the matched points from
every memory entry before prompt sampling, so recent appearances and
the pinned reference jointly steer the segmenter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .config import RunConfig
from .core import FeatureMap, PatchPoint, PixelMask, downsample_mask_to_grid
from .errors import EmptyMatch, EmptyResult
from .pipeline import PipelineResult, propose_and_select, run_matching


@dataclass(frozen=True)
class MemoryEntry:
    frame_idx: int
    features: FeatureMap
    mask: PixelMask
    raw_score: float
    pinned: bool = False


def effective_score(entry: MemoryEntry, current_frame: int, decay: float) -> float:
    """Eviction priority: raw score decayed by age; pinned entries outrank all."""
    if not (0.0 < decay <= 1.0):
        raise ValueError("decay must be in (0, 1]")
    if current_frame < entry.frame_idx:
        raise ValueError("current_frame precedes the entry")
    if entry.pinned:
        return math.inf
    return entry.raw_score * decay ** (current_frame - entry.frame_idx)


@dataclass
class ObjectMemory:
    capacity: int
    decay: float
    entries: list[MemoryEntry] = field(default_factory=list)

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")

    @property
    def pinned(self) -> MemoryEntry:
        for e in self.entries:
            if e.pinned:
                return e
        raise ValueError("memory lost its pinned entry")

    def insert(self, entry: MemoryEntry, current_frame: int) -> None:
        self.entries.append(entry)
        if len(self.entries) > self.capacity:
            # evict the unpinned entry with the lowest decayed score;
            # ties fall to the oldest frame
            victim = min(
                (e for e in self.entries if not e.pinned),
                key=lambda e: (effective_score(e, current_frame, self.decay), e.frame_idx),
            )
            self.entries.remove(victim)


@dataclass
class MemoryState:
    """Per-object memories plus tracking bookkeeping."""

    objects: dict[str, ObjectMemory] = field(default_factory=dict)

    @staticmethod
    def initialize(reference: FeatureMap, masks: dict[str, PixelMask],
                   cfg: RunConfig) -> "MemoryState":
        state = MemoryState()
        for obj_id, mask in masks.items():
            memory = ObjectMemory(capacity=cfg.memory_capacity, decay=cfg.memory_decay)
            memory.entries.append(MemoryEntry(
                frame_idx=0, features=reference, mask=mask, raw_score=1.0, pinned=True,
            ))
            state.objects[obj_id] = memory
        return state


def _pooled_match(memory: ObjectMemory, frame: FeatureMap, cfg: RunConfig) -> list[PatchPoint]:
    """Union of matched points against every memory entry, first seen first."""
    pooled: list[PatchPoint] = []
    seen: set[PatchPoint] = set()
    any_hit = False
    for entry in memory.entries:
        try:
            ref_patches = downsample_mask_to_grid(
                entry.mask, entry.features.height, entry.features.width,
                entry.features.stride_px, cfg.grid_threshold,
            )
            matched = run_matching(entry.features, frame, ref_patches, cfg.matching)
        except (EmptyMatch, EmptyResult):
            continue
        any_hit = True
        for p in matched:
            if p not in seen:
                seen.add(p)
                pooled.append(p)
    if not any_hit:
        raise EmptyMatch("no memory entry produced a correspondence")
    return pooled


def track_frame(
    frame: FeatureMap,
    frame_image_id: str,
    frame_idx: int,
    memory: MemoryState,
    segmenter,
    cfg: RunConfig,
    image_hw: tuple[int, int] | None = None,
) -> tuple[dict[str, PixelMask], MemoryState]:
    """Segment every tracked object in one frame and update the memory.

    Objects whose matching comes up empty get an empty mask for this
    frame and no memory insertion; the pinned reference keeps them
    recoverable. Pixels claimed by several objects go to the one with
    the higher frame score (ties to the earlier object id).
    """
    if image_hw is None:
        image_hw = (frame.height * frame.stride_px, frame.width * frame.stride_px)

    results: dict[str, PipelineResult] = {}
    for obj_id in sorted(memory.objects):
        obj_memory = memory.objects[obj_id]
        pinned = obj_memory.pinned
        try:
            pooled = _pooled_match(obj_memory, frame, cfg)
            pinned_patches = downsample_mask_to_grid(
                pinned.mask, pinned.features.height, pinned.features.width,
                pinned.features.stride_px, cfg.grid_threshold,
            )
            obj_cfg = replace(cfg, seed=cfg.seed + frame_idx)
            results[obj_id] = propose_and_select(
                pooled, pinned.features, pinned_patches, frame, frame_image_id,
                segmenter, obj_cfg, image_hw=image_hw,
            )
        except (EmptyMatch, EmptyResult):
            results[obj_id] = PipelineResult(
                mask=PixelMask.empty(*image_hw), kept=[], proposals=[],
                matched_count=0, raw_score=0.0,
            )

    masks = _arbitrate(results, image_hw)

    for obj_id, result in results.items():
        mask = masks[obj_id]
        if mask.area == 0:
            continue  # nothing usable to remember
        memory.objects[obj_id].insert(
            MemoryEntry(frame_idx=frame_idx, features=frame, mask=mask,
                        raw_score=result.raw_score),
            current_frame=frame_idx,
        )
    return masks, memory


def _arbitrate(results: dict[str, PipelineResult],
               image_hw: tuple[int, int]) -> dict[str, PixelMask]:
    """Resolve overlapping object claims by the higher winning score."""
    order = sorted(results, key=lambda oid: (-results[oid].raw_score, oid))
    taken = np.zeros(image_hw, dtype=bool)
    masks: dict[str, PixelMask] = {}
    for obj_id in order:
        bits = results[obj_id].mask.bits & ~taken
        taken |= bits
        masks[obj_id] = PixelMask(bits)
    return masks


def track_video(
    frames: list[tuple[str, FeatureMap]],
    reference_masks: dict[str, PixelMask],
    segmenter,
    cfg: RunConfig,
    image_hw: tuple[int, int] | None = None,
) -> dict[str, list[PixelMask]]:
    """Track all objects through an ordered frame list.

    frames[0] is the reference frame the given masks annotate; its
    prediction is the given mask itself.
    """
    if not frames:
        raise ValueError("need at least one frame")
    _, ref_features = frames[0]
    if image_hw is None:
        image_hw = (ref_features.height * ref_features.stride_px,
                    ref_features.width * ref_features.stride_px)
    memory = MemoryState.initialize(ref_features, reference_masks, cfg)
    tracks: dict[str, list[PixelMask]] = {
        obj_id: [mask] for obj_id, mask in reference_masks.items()
    }
    for frame_idx, (image_id, features) in enumerate(frames[1:], start=1):
        masks, memory = track_frame(features, image_id, frame_idx, memory,
                                    segmenter, cfg, image_hw=image_hw)
        for obj_id, mask in masks.items():
            tracks[obj_id].append(mask)
    return tracks
