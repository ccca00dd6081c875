"""Synthetic feature-grid scenes for tests, benchmarks, and demos.

Scenes encode object identity as feature directions: each material is a
direction in feature space, object appearance varies along a small
angular manifold, and per-patch jitter models encoder noise. Ground
truth masks and the oracle segmenter's shape registry come from the
same region definitions, so every benchmark is self-validating.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import FeatureMap, PixelMask, save_feature_map, save_mask
from .segmenter import OracleSegmenter, OracleShape

Cells = list[tuple[int, int]]


def rect_cells(r0: int, c0: int, h: int, w: int) -> Cells:
    return [(r, c) for r in range(r0, r0 + h) for c in range(c0, c0 + w)]


def cells_to_mask(cells: Cells, grid_h: int, grid_w: int, stride: int) -> PixelMask:
    bits = np.zeros((grid_h * stride, grid_w * stride), dtype=bool)
    for r, c in cells:
        bits[r * stride:(r + 1) * stride, c * stride:(c + 1) * stride] = True
    return PixelMask(bits)


@dataclass
class GridScene:
    """A feature grid under construction plus its pixel geometry."""

    grid_h: int
    grid_w: int
    channels: int
    stride: int
    rng: np.random.Generator
    jitter: float = 0.003
    feats: np.ndarray = field(init=False)

    def __post_init__(self):
        self.feats = np.zeros((self.grid_h, self.grid_w, self.channels), dtype=np.float64)
        self.fill_background()

    # materials live in the first four channels: e0/e1 span the object
    # appearance plane, e2 is background, e3 lifts confusers off-plane
    def plane_dir(self, angle_deg: float, lift_deg: float = 0.0) -> np.ndarray:
        v = np.zeros(self.channels)
        a = math.radians(angle_deg)
        el = math.radians(lift_deg)
        v[0] = math.cos(el) * math.cos(a)
        v[1] = math.cos(el) * math.sin(a)
        v[3] = math.sin(el)
        return v

    def background_dir(self) -> np.ndarray:
        v = np.zeros(self.channels)
        v[2] = 1.0
        return v

    def _noisy(self, direction: np.ndarray) -> np.ndarray:
        v = direction + self.rng.normal(0.0, self.jitter, self.channels)
        return v / np.linalg.norm(v)

    def fill_background(self) -> None:
        for r in range(self.grid_h):
            for c in range(self.grid_w):
                self.feats[r, c] = self._noisy(self.background_dir())

    def paint(self, cells: Cells, angle_range: tuple[float, float],
              lift_deg: float = 0.0, mix_background: float = 0.0) -> None:
        """Assign each cell a direction sampled from the angle range."""
        lo, hi = angle_range
        for r, c in cells:
            angle = self.rng.uniform(lo, hi) if hi > lo else lo
            d = self.plane_dir(angle, lift_deg)
            if mix_background > 0.0:
                d = (1.0 - mix_background) * d + mix_background * self.background_dir()
                d = d / np.linalg.norm(d)
            self.feats[r, c] = self._noisy(d)

    def feature_map(self, origin: str) -> FeatureMap:
        return FeatureMap(data=self.feats.astype(np.float32), stride_px=self.stride,
                          origin=origin)

    def mask(self, cells: Cells) -> PixelMask:
        return cells_to_mask(cells, self.grid_h, self.grid_w, self.stride)

    @property
    def image_hw(self) -> tuple[int, int]:
        return self.grid_h * self.stride, self.grid_w * self.stride


@dataclass
class Episode:
    """In-memory one-shot episode: reference pair, target, truth, oracle."""

    ref_features: FeatureMap
    ref_mask: PixelMask
    target_features: FeatureMap
    image_id: str
    oracle: OracleSegmenter
    ground_truth: PixelMask
    image_hw: tuple[int, int]
    extra_truths: dict[str, PixelMask] = field(default_factory=dict)


def identity_episode(seed: int, grid: tuple[int, int] = (12, 12), channels: int = 16,
                     stride: int = 8) -> Episode:
    """Target is a copy of the reference; every patch feature is distinct."""
    rng = np.random.default_rng(seed)
    gh, gw = grid
    feats = rng.normal(size=(gh, gw, channels))
    feats /= np.linalg.norm(feats, axis=2, keepdims=True)
    fm = FeatureMap(data=feats.astype(np.float32), stride_px=stride, origin=f"identity{seed}")

    h = int(rng.integers(3, gh - 2))
    w = int(rng.integers(3, gw - 2))
    r0 = int(rng.integers(0, gh - h))
    c0 = int(rng.integers(0, gw - w))
    cells = rect_cells(r0, c0, h, w)
    mask = cells_to_mask(cells, gh, gw, stride)

    image_id = f"identity{seed}_target"
    oracle = OracleSegmenter()
    oracle.register(image_id, gh * stride, gw * stride,
                    [OracleShape(mask=mask, shape_id="object")])
    return Episode(ref_features=fm, ref_mask=mask, target_features=fm,
                   image_id=image_id, oracle=oracle, ground_truth=mask,
                   image_hw=(gh * stride, gw * stride))


def _place_rect(rng, grid_h, grid_w, h, w, occupied: set, margin: int = 1):
    """Random free rectangle; returns its cells and marks them occupied."""
    for _ in range(200):
        r0 = int(rng.integers(0, grid_h - h + 1))
        c0 = int(rng.integers(0, grid_w - w + 1))
        cells = rect_cells(r0, c0, h, w)
        padded = rect_cells(max(0, r0 - margin), max(0, c0 - margin),
                            min(grid_h, r0 + h + margin) - max(0, r0 - margin),
                            min(grid_w, c0 + w + margin) - max(0, c0 - margin))
        if not any(c in occupied for c in padded):
            occupied.update(padded)
            return cells, (r0, c0)
    raise RuntimeError("could not place a region; grid too crowded")


def distractor_episode(seed: int, grid: tuple[int, int] = (18, 22), channels: int = 8,
                       stride: int = 8) -> Episode:
    """Target holds the object, a look-alike distractor, and an off-plane
    confuser; the reference image carries a patch of distractor texture
    outside its mask so reverse matching can expose outliers.

    Appearance angles: reference mask spans [0, 24] deg, the target
    object only [0, 14] (pose change), the distractor [26, 38]. Forward
    matches from the upper reference range flip to the distractor; their
    reverse matches land on the reference's off-mask distractor texture
    and are filtered. The confuser sits near the mask appearance but
    lifted off-plane, so it attracts reverse-only matching exclusively.
    """
    rng = np.random.default_rng(seed)
    gh, gw = grid

    ref = GridScene(gh, gw, channels, stride, rng)
    occupied: set = set()
    ref_obj, _ = _place_rect(rng, gh, gw, 5, 5, occupied)
    ref_tex, _ = _place_rect(rng, gh, gw, 4, 5, occupied)
    ref.paint(ref_obj, (0.0, 24.0))
    ref.paint(ref_tex, (26.0, 38.0))

    tgt = GridScene(gh, gw, channels, stride, rng)
    occupied = set()
    obj, _ = _place_rect(rng, gh, gw, 5, 5, occupied)
    distractor, _ = _place_rect(rng, gh, gw, 4, 4, occupied)
    confuser, _ = _place_rect(rng, gh, gw, 5, 5, occupied)
    tgt.paint(obj, (0.0, 14.0))
    tgt.paint(distractor, (26.0, 38.0))
    tgt.paint(confuser, (8.0, 12.0), lift_deg=3.0)

    image_id = f"distractor{seed}_target"
    oracle = OracleSegmenter()
    oracle.register(image_id, *tgt.image_hw, [
        OracleShape(mask=tgt.mask(obj), shape_id="object"),
        OracleShape(mask=tgt.mask(distractor), shape_id="distractor"),
        OracleShape(mask=tgt.mask(confuser), shape_id="confuser"),
    ])
    return Episode(
        ref_features=ref.feature_map(f"distractor{seed}_ref"),
        ref_mask=ref.mask(ref_obj),
        target_features=tgt.feature_map(image_id),
        image_id=image_id,
        oracle=oracle,
        ground_truth=tgt.mask(obj),
        image_hw=tgt.image_hw,
    )


def two_instance_episode(seed: int, with_confusers: bool = False,
                         grid: tuple[int, int] = (20, 30), channels: int = 8,
                         stride: int = 8) -> Episode:
    """Two same-class instances; optionally adds fragment shapes and a
    bridging mask so single-metric scoring has something to get wrong.

    extra_truths carries the per-instance masks ("instance_0"/"instance_1")
    and their union ("union").
    """
    rng = np.random.default_rng(seed)
    gh, gw = grid
    size = int(rng.integers(5, 7))

    ref = GridScene(gh, gw, channels, stride, rng)
    occupied: set = set()
    ref_obj, _ = _place_rect(rng, gh, gw, size + 1, size + 1, occupied)
    ref.paint(ref_obj, (0.0, 30.0))

    tgt = GridScene(gh, gw, channels, stride, rng)
    occupied = set()
    inst = []
    for _ in range(2):
        cells, _ = _place_rect(rng, gh, gw, size, size, occupied, margin=2)
        tgt.paint(cells, (0.0, 30.0))
        inst.append(cells)

    shapes = [
        OracleShape(mask=tgt.mask(inst[0]), shape_id="instance_0"),
        OracleShape(mask=tgt.mask(inst[1]), shape_id="instance_1"),
    ]
    if with_confusers:
        half = size // 2
        frags = []
        for idx, cells in enumerate(inst):
            r0, c0 = cells[0]
            frag = rect_cells(r0, c0, size, half)
            frags.append(frag)
            shapes.append(OracleShape(mask=tgt.mask(frag), shape_id=f"fragment_{idx}",
                                      parent=f"instance_{idx}"))
        connector = _connector_cells(inst[0], inst[1], size, gh, gw)
        bridge = sorted(set(inst[0]) | set(inst[1]) | set(connector))
        shapes.append(OracleShape(mask=tgt.mask(bridge), shape_id="bridge"))

    image_id = f"two_instance{seed}_target"
    oracle = OracleSegmenter()
    oracle.register(image_id, *tgt.image_hw, shapes)

    union = tgt.mask(inst[0]).union(tgt.mask(inst[1]))
    return Episode(
        ref_features=ref.feature_map(f"two_instance{seed}_ref"),
        ref_mask=ref.mask(ref_obj),
        target_features=tgt.feature_map(image_id),
        image_id=image_id,
        oracle=oracle,
        ground_truth=union,
        image_hw=tgt.image_hw,
        extra_truths={
            "instance_0": tgt.mask(inst[0]),
            "instance_1": tgt.mask(inst[1]),
            "union": union,
        },
    )


def _connector_cells(cells_a: Cells, cells_b: Cells, size: int,
                     grid_h: int, grid_w: int) -> Cells:
    """An L-shaped strip of background cells joining two rectangles,
    sized about 1.5x one instance."""
    (ra, ca) = cells_a[len(cells_a) // 2]
    (rb, cb) = cells_b[len(cells_b) // 2]
    width = max(1, int(round(1.5 * size * size / (abs(ra - rb) + abs(ca - cb) + 1))))
    strip: set = set()
    c_lo, c_hi = sorted((ca, cb))
    for c in range(c_lo, c_hi + 1):
        for dr in range(width):
            strip.add((ra + dr, c))
    r_lo, r_hi = sorted((ra, rb))
    for r in range(r_lo, r_hi + 1):
        for dc in range(width):
            strip.add((r, cb + dc))
    existing = set(cells_a) | set(cells_b)
    return sorted((r, c) for r, c in strip - existing
                  if 0 <= r < grid_h and 0 <= c < grid_w)


@dataclass
class VideoEpisode:
    """Synthetic tracking sequence with ground truth and oracle registry."""

    frames: list[tuple[str, FeatureMap]]
    reference_masks: dict[str, PixelMask]
    ground_truth: dict[str, list[PixelMask]]
    oracle: OracleSegmenter
    image_hw: tuple[int, int]
    occlusion: tuple[int, int]


def drift_video(seed: int, n_frames: int = 12, occlusion: tuple[int, int] = (5, 8),
                grid: tuple[int, int] = (16, 30), channels: int = 8,
                stride: int = 8, drift_deg: float = 7.0) -> VideoEpisode:
    """A translating object whose appearance drifts over time, plus a
    static distractor frozen at the reference appearance's far side.

    Early frames stay matchable from the pinned reference; after the
    occlusion the drifted object is only reachable from recent memory
    entries, so a memory of one (the pinned frame alone) latches onto
    the distractor and loses the object.
    """
    rng = np.random.default_rng(seed)
    gh, gw = grid
    size = int(rng.integers(4, 6))
    r0 = int(rng.integers(1, gh - size - 1))
    c_start = int(rng.integers(1, 4))
    distractor_angle = -35.0

    d_r0 = int(rng.integers(1, gh - size - 1))
    d_c0 = gw - size - 2
    distractor_cells = rect_cells(d_r0, d_c0, size, size)

    frames: list[tuple[str, FeatureMap]] = []
    gts: list[PixelMask] = []
    oracle = OracleSegmenter()
    image_hw = (gh * stride, gw * stride)

    for t in range(n_frames):
        scene = GridScene(gh, gw, channels, stride, rng)
        occluded = occlusion[0] <= t < occlusion[1]
        obj_cells = rect_cells(r0, c_start + t, size, size)
        shapes = []
        if not occluded:
            angle = drift_deg * t
            scene.paint(obj_cells, (angle - 1.0, angle + 1.0))
            scene.paint(distractor_cells, (distractor_angle - 1.0, distractor_angle + 1.0))
            shapes = [
                OracleShape(mask=scene.mask(obj_cells), shape_id="object"),
                OracleShape(mask=scene.mask(distractor_cells), shape_id="distractor"),
            ]
        image_id = f"drift{seed}_f{t:02d}"
        oracle.register(image_id, *image_hw, shapes)
        frames.append((image_id, scene.feature_map(image_id)))
        gts.append(scene.mask(obj_cells) if not occluded else PixelMask.empty(*image_hw))

    return VideoEpisode(
        frames=frames,
        reference_masks={"1": gts[0]},
        ground_truth={"1": gts},
        oracle=oracle,
        image_hw=image_hw,
        occlusion=occlusion,
    )


def write_episode_dir(episodes: list[Episode], out_dir, stride: int = 8) -> Path:
    """Persist in-memory episodes as an on-disk manifest the CLI can run.

    Oracle shapes are exported so ``--segmenter oracle`` reproduces the
    in-memory behavior exactly. Returns the manifest path.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {"stride_px": stride, "episodes": []}
    for i, ep in enumerate(episodes):
        eid = f"ep{i:04d}"
        save_feature_map(ep.ref_features, out_dir / f"{eid}_ref.mtft")
        save_mask(ep.ref_mask, out_dir / f"{eid}_ref_mask.png")
        save_feature_map(ep.target_features, out_dir / f"{eid}_target.mtft")
        save_mask(ep.ground_truth, out_dir / f"{eid}_gt.png")
        shapes = []
        for k, shape in enumerate(ep.oracle.registered_shapes(ep.image_id)):
            name = f"{eid}_shape{k}.png"
            save_mask(shape.mask, out_dir / name)
            shapes.append({"mask": name, "id": shape.shape_id, "parent": shape.parent})
        manifest["episodes"].append({
            "id": eid,
            "reference": {"features": f"{eid}_ref.mtft", "mask": f"{eid}_ref_mask.png"},
            "target": {
                "features": f"{eid}_target.mtft",
                "image_id": ep.image_id,
                "image_size": list(ep.image_hw),
                "oracle_shapes": shapes,
            },
            "ground_truth": f"{eid}_gt.png",
        })
    manifest_path = out_dir / "episodes.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return manifest_path


def write_video_dir(video: VideoEpisode, out_dir, stride: int = 8) -> Path:
    """Persist a synthetic video as an on-disk manifest for the CLI."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {"stride_px": stride, "frames": [], "reference_masks": {},
                "ground_truth": {}}
    for t, (image_id, fm) in enumerate(video.frames):
        save_feature_map(fm, out_dir / f"frame{t:03d}.mtft")
        shapes = []
        for k, shape in enumerate(video.oracle.registered_shapes(image_id)):
            name = f"frame{t:03d}_shape{k}.png"
            save_mask(shape.mask, out_dir / name)
            shapes.append({"mask": name, "id": shape.shape_id, "parent": shape.parent})
        manifest["frames"].append({
            "image_id": image_id,
            "features": f"frame{t:03d}.mtft",
            "oracle_shapes": shapes,
        })
    for obj_id, mask in video.reference_masks.items():
        name = f"obj{obj_id}_reference.png"
        save_mask(mask, out_dir / name)
        manifest["reference_masks"][obj_id] = name
    for obj_id, seq in video.ground_truth.items():
        names = []
        for t, mask in enumerate(seq):
            name = f"obj{obj_id}_gt{t:03d}.png"
            save_mask(mask, out_dir / name)
            names.append(name)
        manifest["ground_truth"][obj_id] = names
    manifest_path = out_dir / "video.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return manifest_path
