"""File-based episode running: manifests, reports, metric aggregation.

An episode list is a JSON manifest; each episode names the reference
feature/mask files, the target feature file, optional ground truth, and
(for the oracle backend) the shape masks the oracle should answer with.
Reports are one JSON object per episode, written with sorted keys and
no volatile fields so a fixed seed reproduces them byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .config import RunConfig, config_as_dict
from .core import PixelMask, load_feature_map, load_mask, save_mask
from .metrics import j_and_f, miou
from .pipeline import PipelineResult, run_pipeline
from .segmenter import OracleSegmenter, OracleShape
from .tracker import track_video


@dataclass(frozen=True)
class Episode:
    episode_id: str
    reference_features: Path
    reference_mask: Path
    target_features: Path
    image_id: str
    ground_truth: Path | None = None
    oracle_shapes: tuple[tuple[Path, str, str | None], ...] = ()  # (mask, id, parent)
    image_size: tuple[int, int] | None = None


def load_episode_manifest(path) -> tuple[list[Episode], int]:
    """Parse an episode-list JSON; returns (episodes, stride_px)."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    stride = int(doc.get("stride_px", 14))
    base = path.parent
    episodes = []
    for i, ep in enumerate(doc["episodes"]):
        target = ep["target"]
        shapes = tuple(
            (base / s["mask"], s.get("id", f"shape{k}"), s.get("parent"))
            for k, s in enumerate(target.get("oracle_shapes", []))
        )
        episodes.append(Episode(
            episode_id=ep.get("id", f"ep{i:04d}"),
            reference_features=base / ep["reference"]["features"],
            reference_mask=base / ep["reference"]["mask"],
            target_features=base / target["features"],
            image_id=target.get("image_id", Path(target["features"]).stem),
            ground_truth=(base / ep["ground_truth"]) if ep.get("ground_truth") else None,
            oracle_shapes=shapes,
            image_size=tuple(target["image_size"]) if target.get("image_size") else None,
        ))
    return episodes, stride


def build_oracle(episodes: list[Episode]) -> OracleSegmenter:
    """Register every episode's shape masks with a fresh oracle."""
    oracle = OracleSegmenter()
    for ep in episodes:
        shapes = []
        dims = None
        for mask_path, shape_id, parent in ep.oracle_shapes:
            mask = load_mask(mask_path)
            dims = (mask.height_px, mask.width_px)
            shapes.append(OracleShape(mask=mask, shape_id=shape_id, parent=parent))
        if dims is None and ep.image_size is not None:
            dims = ep.image_size
        if dims is None and ep.ground_truth is not None:
            gt = load_mask(ep.ground_truth)
            dims = (gt.height_px, gt.width_px)
        if dims is None:
            raise ValueError(
                f"episode {ep.episode_id}: oracle backend needs shapes, "
                "an image_size, or ground truth to learn the image dims"
            )
        oracle.register(ep.image_id, dims[0], dims[1], shapes)
    return oracle


def result_report(episode_id: str, result: PipelineResult, cfg: RunConfig,
                  iou_value: float | None) -> dict:
    return {
        "episode": episode_id,
        "matched_points": result.matched_count,
        "proposals": [
            {
                "index": i,
                "source": p.source,
                "confidence": p.confidence,
                "emd": p.score.emd,
                "purity": p.score.purity,
                "coverage": p.score.coverage,
                "score": p.score.score,
                "area_px": p.mask.area,
            }
            for i, p in enumerate(result.proposals)
        ],
        "kept": list(result.kept),
        "winning_score": result.raw_score,
        "iou": iou_value,
        "thresholds": {
            "emd_max": cfg.select.emd_max,
            "purity_min": cfg.select.purity_min,
            "coverage_min": cfg.select.coverage_min,
        },
        "seed": cfg.seed,
    }


def run_episode(ep: Episode, cfg: RunConfig, segmenter, stride_px: int,
                report_dir: Path | None = None) -> tuple[PixelMask, dict]:
    """Execute the full pipeline on one episode; optionally persist the
    predicted mask and the JSON report."""
    ref = load_feature_map(ep.reference_features, stride_px=stride_px)
    ref_mask = load_mask(ep.reference_mask)
    target = load_feature_map(ep.target_features, stride_px=stride_px)
    try:
        result = run_pipeline(ref, ref_mask, target, ep.image_id, segmenter, cfg,
                              image_hw=ep.image_size)
    except Exception as exc:
        raise type(exc)(f"episode {ep.episode_id}: {exc}") from exc

    iou_value = None
    if ep.ground_truth is not None:
        iou_value = miou([result.mask], [load_mask(ep.ground_truth)])
    report = result_report(ep.episode_id, result, cfg, iou_value)

    if report_dir is not None:
        report_dir = Path(report_dir)
        report_dir.mkdir(parents=True, exist_ok=True)
        mask_path = report_dir / f"{ep.episode_id}_mask.png"
        save_mask(result.mask, mask_path)
        report["prediction"] = mask_path.name
        with open(report_dir / f"{ep.episode_id}.json", "w", encoding="utf-8") as fh:
            json.dump(report, fh, sort_keys=True, indent=1)
            fh.write("\n")
    return result.mask, report


def run_bench(manifest_path, cfg: RunConfig, segmenter=None,
              report_dir: Path | None = None) -> dict:
    """Run every episode of a manifest and aggregate mIoU."""
    episodes, stride = load_episode_manifest(manifest_path)
    if segmenter is None:
        segmenter = build_oracle(episodes)
    reports = []
    preds, gts = [], []
    for ep in episodes:
        mask, report = run_episode(ep, cfg, segmenter, stride, report_dir=report_dir)
        reports.append(report)
        if ep.ground_truth is not None:
            preds.append(mask)
            gts.append(load_mask(ep.ground_truth))
    summary = {
        "episodes": len(episodes),
        "miou": miou(preds, gts) if preds else None,
        "config": config_as_dict(cfg),
    }
    if report_dir is not None:
        with open(Path(report_dir) / "summary.json", "w", encoding="utf-8") as fh:
            json.dump(summary, fh, sort_keys=True, indent=1)
            fh.write("\n")
    return summary


def load_video_manifest(path) -> dict:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    base = path.parent
    stride = int(doc.get("stride_px", 14))
    frames = []
    for fr in doc["frames"]:
        frames.append({
            "image_id": fr["image_id"],
            "features": base / fr["features"],
            "oracle_shapes": [
                (base / s["mask"], s.get("id", f"shape{k}"), s.get("parent"))
                for k, s in enumerate(fr.get("oracle_shapes", []))
            ],
        })
    reference_masks = {k: base / v for k, v in doc["reference_masks"].items()}
    ground_truth = {
        k: [base / p for p in seq] for k, seq in doc.get("ground_truth", {}).items()
    }
    return {"stride_px": stride, "frames": frames,
            "reference_masks": reference_masks, "ground_truth": ground_truth}


def run_vos(manifest_path, cfg: RunConfig, segmenter=None,
            report_dir: Path | None = None) -> dict:
    """Track a video manifest; returns per-object J&F when truth is given."""
    doc = load_video_manifest(manifest_path)
    stride = doc["stride_px"]
    frames = [
        (fr["image_id"], load_feature_map(fr["features"], stride_px=stride))
        for fr in doc["frames"]
    ]
    if segmenter is None:
        oracle = OracleSegmenter()
        for fr, (_, fm) in zip(doc["frames"], frames):
            shapes = [
                OracleShape(mask=load_mask(mp), shape_id=sid, parent=parent)
                for mp, sid, parent in fr["oracle_shapes"]
            ]
            oracle.register(fr["image_id"], fm.height * stride, fm.width * stride, shapes)
        segmenter = oracle
    reference_masks = {k: load_mask(p) for k, p in doc["reference_masks"].items()}
    tracks = track_video(frames, reference_masks, segmenter, cfg)

    summary = {"frames": len(frames), "objects": sorted(tracks), "config": config_as_dict(cfg)}
    if doc["ground_truth"]:
        per_object = {}
        for obj_id, gt_paths in doc["ground_truth"].items():
            gt_seq = [load_mask(p) for p in gt_paths]
            # frame 0 is the given annotation; score the tracked frames
            j, f, jf = j_and_f(tracks[obj_id][1:], gt_seq[1:])
            per_object[obj_id] = {"J": j, "F": f, "J&F": jf}
        summary["per_object"] = per_object
        summary["J&F"] = sum(v["J&F"] for v in per_object.values()) / len(per_object)

    if report_dir is not None:
        report_dir = Path(report_dir)
        report_dir.mkdir(parents=True, exist_ok=True)
        for obj_id, masks in tracks.items():
            for t, mask in enumerate(masks):
                save_mask(mask, report_dir / f"obj{obj_id}_f{t:04d}.png")
        with open(report_dir / "vos_summary.json", "w", encoding="utf-8") as fh:
            json.dump(summary, fh, sort_keys=True, indent=1)
            fh.write("\n")
    return summary
