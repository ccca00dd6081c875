"""Segmentation quality metrics: mIoU, region J, boundary F."""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from .core import PixelMask, iou
from .errors import DimMismatch

_CROSS = ndimage.generate_binary_structure(2, 1)


def miou(preds: list[PixelMask], gts: list[PixelMask]) -> float:
    """Mean IoU over aligned mask pairs; empty-vs-empty counts as 1."""
    if len(preds) != len(gts):
        raise DimMismatch(f"{len(preds)} predictions vs {len(gts)} ground truths")
    if not preds:
        raise ValueError("need at least one pair")
    total = 0.0
    for p, g in zip(preds, gts):
        if p.bits.shape != g.bits.shape:
            raise DimMismatch(f"mask dims differ: {p.bits.shape} vs {g.bits.shape}")
        total += iou(p, g)
    return total / len(preds)


def _boundary(mask: PixelMask) -> np.ndarray:
    """Foreground pixels adjacent to background or the image border."""
    eroded = ndimage.binary_erosion(mask.bits, structure=_CROSS, border_value=0)
    return mask.bits & ~eroded


def _disk(radius: int) -> np.ndarray:
    span = np.arange(-radius, radius + 1)
    yy, xx = np.meshgrid(span, span, indexing="ij")
    return (yy * yy + xx * xx) <= radius * radius


def boundary_f_measure(pred: PixelMask, gt: PixelMask, tolerance_px: int | None = None) -> float:
    """Boundary precision/recall F-score with a diagonal-scaled match radius.

    The default tolerance is ceil(0.0088 * image diagonal) pixels, the
    common video-segmentation convention.
    """
    if pred.bits.shape != gt.bits.shape:
        raise DimMismatch(f"mask dims differ: {pred.bits.shape} vs {gt.bits.shape}")
    h, w = pred.bits.shape
    if tolerance_px is None:
        tolerance_px = math.ceil(0.0088 * math.hypot(h, w))
    pred_b = _boundary(pred)
    gt_b = _boundary(gt)
    n_pred = int(pred_b.sum())
    n_gt = int(gt_b.sum())
    if n_pred == 0 and n_gt == 0:
        return 1.0
    if n_pred == 0 or n_gt == 0:
        return 0.0
    footprint = _disk(tolerance_px)
    gt_dil = ndimage.binary_dilation(gt_b, structure=footprint)
    pred_dil = ndimage.binary_dilation(pred_b, structure=footprint)
    precision = int((pred_b & gt_dil).sum()) / n_pred
    recall = int((gt_b & pred_dil).sum()) / n_gt
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def j_and_f(pred_seq: list[PixelMask], gt_seq: list[PixelMask]) -> tuple[float, float, float]:
    """Mean region IoU (J), mean boundary F, and their average over a sequence."""
    if len(pred_seq) != len(gt_seq):
        raise DimMismatch(f"{len(pred_seq)} predictions vs {len(gt_seq)} ground truths")
    if not pred_seq:
        raise ValueError("need at least one frame")
    j_scores = []
    f_scores = []
    for p, g in zip(pred_seq, gt_seq):
        if p.bits.shape != g.bits.shape:
            raise DimMismatch(f"mask dims differ: {p.bits.shape} vs {g.bits.shape}")
        j_scores.append(iou(p, g))
        f_scores.append(boundary_f_measure(p, g))
    j = float(np.mean(j_scores))
    f = float(np.mean(f_scores))
    return j, f, (j + f) / 2.0
