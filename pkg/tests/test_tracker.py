import math

import numpy as np
import pytest
from dataclasses import replace

from matchseg.config import PRESETS, RunConfig, SelectConfig
from matchseg.core import FeatureMap, PixelMask, iou
from matchseg.metrics import j_and_f
from matchseg.segmenter import OracleSegmenter, OracleShape
from matchseg.synthetic import GridScene, drift_video, rect_cells
from matchseg.tracker import (
    MemoryEntry,
    MemoryState,
    ObjectMemory,
    effective_score,
    track_frame,
    track_video,
)


def _entry(frame_idx, raw_score, pinned=False, seed=0):
    rng = np.random.default_rng(seed)
    fm = FeatureMap(data=rng.normal(size=(2, 2, 3)).astype(np.float32), stride_px=8)
    return MemoryEntry(frame_idx=frame_idx, features=fm, mask=PixelMask.full(16, 16),
                       raw_score=raw_score, pinned=pinned)


class TestEffectiveScore:
    def test_no_decay(self):
        assert effective_score(_entry(0, 0.8), current_frame=5, decay=1.0) == 0.8

    def test_power_law(self):
        assert effective_score(_entry(0, 1.0), current_frame=2, decay=0.5) == 0.25

    def test_pinned_is_infinite(self):
        assert effective_score(_entry(0, 0.1, pinned=True), 9, 0.5) == math.inf

    def test_bad_decay(self):
        with pytest.raises(ValueError):
            effective_score(_entry(0, 1.0), 1, 0.0)


class TestMemory:
    def test_capacity_and_pin_never_evicted(self):
        memory = ObjectMemory(capacity=2, decay=0.9)
        memory.entries.append(_entry(0, 0.1, pinned=True))
        for t in range(1, 5):
            memory.insert(_entry(t, 0.5), current_frame=t)
            assert len(memory.entries) <= 2
            assert any(e.pinned for e in memory.entries)

    def test_equal_scores_evict_older_first(self):
        memory = ObjectMemory(capacity=3, decay=0.9)
        memory.entries.append(_entry(0, 1.0, pinned=True))
        memory.insert(_entry(1, 0.7), current_frame=1)
        memory.insert(_entry(2, 0.7), current_frame=2)
        memory.insert(_entry(3, 0.7), current_frame=3)
        frames = sorted(e.frame_idx for e in memory.entries)
        assert frames == [0, 2, 3]  # entry from frame 1 decayed furthest


def _simple_tracking_config(**kwargs):
    return RunConfig(
        task="vos",
        select=SelectConfig(emd_max=0.75, alpha=0.4, beta=1.0, lam=1.0, num_merged=1),
        **kwargs,
    )


class TestTrackFrame:
    def test_identity_frame_recovers_reference(self):
        rng = np.random.default_rng(4)
        scene = GridScene(10, 10, 8, 8, rng)
        cells = rect_cells(2, 2, 4, 4)
        scene.paint(cells, (0.0, 6.0))
        fm = scene.feature_map("ref")
        mask = scene.mask(cells)

        oracle = OracleSegmenter()
        oracle.register("frame1", *scene.image_hw, [OracleShape(mask=mask, shape_id="obj")])

        cfg = _simple_tracking_config(seed=3)
        memory = MemoryState.initialize(fm, {"1": mask}, cfg)
        masks, memory = track_frame(fm, "frame1", 1, memory, oracle, cfg)
        assert iou(masks["1"], mask) >= 0.99
        assert len(memory.objects["1"].entries) == 2

    def test_capacity_one_keeps_only_pinned(self):
        rng = np.random.default_rng(4)
        scene = GridScene(10, 10, 8, 8, rng)
        cells = rect_cells(2, 2, 4, 4)
        scene.paint(cells, (0.0, 6.0))
        fm = scene.feature_map("ref")
        mask = scene.mask(cells)
        oracle = OracleSegmenter()
        oracle.register("frame1", *scene.image_hw, [OracleShape(mask=mask, shape_id="obj")])

        cfg = _simple_tracking_config(seed=3, memory_capacity=1)
        memory = MemoryState.initialize(fm, {"1": mask}, cfg)
        _, memory = track_frame(fm, "frame1", 1, memory, oracle, cfg)
        entries = memory.objects["1"].entries
        assert len(entries) == 1 and entries[0].pinned

    def test_lost_object_yields_empty_mask(self):
        rng = np.random.default_rng(4)
        ref_scene = GridScene(10, 10, 8, 8, rng)
        cells = rect_cells(2, 2, 4, 4)
        ref_scene.paint(cells, (0.0, 6.0))
        ref = ref_scene.feature_map("ref")
        mask = ref_scene.mask(cells)

        # frame with pure background: nothing to match
        blank_scene = GridScene(10, 10, 8, 8, rng)
        blank = blank_scene.feature_map("blank")
        oracle = OracleSegmenter()
        oracle.register("blank", *blank_scene.image_hw, [])

        cfg = _simple_tracking_config(seed=3)
        memory = MemoryState.initialize(ref, {"1": mask}, cfg)
        masks, memory = track_frame(blank, "blank", 1, memory, oracle, cfg)
        assert masks["1"].area == 0
        assert len(memory.objects["1"].entries) == 1  # nothing inserted


class TestTrackVideo:
    def test_translating_shape_high_iou(self):
        video = drift_video(3, n_frames=10, occlusion=(99, 99), drift_deg=0.0)
        cfg = _simple_tracking_config(seed=6)
        tracks = track_video(video.frames, video.reference_masks, video.oracle, cfg)
        gt = video.ground_truth["1"]
        for pred, truth in zip(tracks["1"][1:], gt[1:]):
            assert iou(pred, truth) >= 0.9

    def test_determinism(self):
        video = drift_video(5)
        cfg = replace(PRESETS["vos"], seed=11)
        a = track_video(video.frames, video.reference_masks, video.oracle, cfg)
        b = track_video(video.frames, video.reference_masks, video.oracle, cfg)
        for obj in a:
            for ma, mb in zip(a[obj], b[obj]):
                assert np.array_equal(ma.bits, mb.bits)

    def test_memory_gap_and_recovery(self):
        video = drift_video(7)
        gt = video.ground_truth["1"]
        scores = {}
        for cap in (1, 4):
            cfg = replace(PRESETS["vos"], seed=2, memory_capacity=cap)
            tracks = track_video(video.frames, video.reference_masks, video.oracle, cfg)
            _, _, jf = j_and_f(tracks["1"][1:], gt[1:])
            scores[cap] = jf
            if cap == 4:
                back = video.occlusion[1]
                assert iou(tracks["1"][back], gt[back]) >= 0.8
        assert scores[4] >= scores[1] + 0.02

    def test_two_objects_tracked_disjointly(self):
        # two static objects of different appearance; predictions must
        # stay disjoint after per-pixel arbitration and track their truths
        rng = np.random.default_rng(15)
        frames = []
        masks = {}
        oracle = OracleSegmenter()
        for t in range(4):
            scene = GridScene(12, 20, 8, 8, rng)
            cells_a = rect_cells(2, 2, 4, 4)
            cells_b = rect_cells(5, 12, 4, 4)
            scene.paint(cells_a, (0.0, 6.0))
            scene.paint(cells_b, (60.0, 66.0))
            image_id = f"multi_f{t}"
            oracle.register(image_id, *scene.image_hw, [
                OracleShape(mask=scene.mask(cells_a), shape_id="a"),
                OracleShape(mask=scene.mask(cells_b), shape_id="b"),
            ])
            frames.append((image_id, scene.feature_map(image_id)))
            if t == 0:
                masks = {"1": scene.mask(cells_a), "2": scene.mask(cells_b)}
            truth_a, truth_b = scene.mask(cells_a), scene.mask(cells_b)

        cfg = _simple_tracking_config(seed=8)
        tracks = track_video(frames, masks, oracle, cfg)
        for t in range(1, 4):
            assert iou(tracks["1"][t], truth_a) >= 0.9
            assert iou(tracks["2"][t], truth_b) >= 0.9
            assert not (tracks["1"][t].bits & tracks["2"][t].bits).any()
