"""Promptable segmenter backends for the wire server.

``StubSegmenter`` grows color-homogeneous regions from the prompt (three
tolerance levels stand in for whole/part/subpart granularity), so the
full serving path runs without any weights. ``SamSegmenter`` wraps a
real promptable segmentation model via transformers and honors the same
interface.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .errors import ModelLoadError


class StubSegmenter:
    """Flood-fill segmenter over color similarity.

    multimask=True returns up to three masks at increasing color
    tolerance (subpart -> part -> whole flavored), each with a fixed
    confidence; multimask=False returns the middle tolerance only.
    """

    LEVELS = ((18.0, 0.9), (36.0, 0.6), (64.0, 0.3))  # (tolerance, confidence)

    def segment(self, image: np.ndarray, points, box, multimask: bool):
        h, w = image.shape[:2]
        if points:
            positives = [(x, y) for x, y, label in points if label == 1]
            if not positives:
                return [np.zeros((h, w), dtype=bool)], [0.0]
            seeds = [(min(h - 1, max(0, int(y))), min(w - 1, max(0, int(x))))
                     for x, y in positives]
            limit = None
        else:
            x0, y0, x1, y1 = box
            cy = min(h - 1, max(0, int((y0 + y1) / 2)))
            cx = min(w - 1, max(0, int((x0 + x1) / 2)))
            seeds = [(cy, cx)]
            limit = (max(0, int(y0)), max(0, int(x0)),
                     min(h, int(y1) + 1), min(w, int(x1) + 1))

        levels = self.LEVELS if multimask else self.LEVELS[1:2]
        masks, confidences = [], []
        for tolerance, confidence in levels:
            mask = np.zeros((h, w), dtype=bool)
            for sy, sx in seeds:
                mask |= self._grow(image, sy, sx, tolerance, limit)
            masks.append(mask)
            confidences.append(confidence if mask.any() else 0.0)
        return masks, confidences

    @staticmethod
    def _grow(image: np.ndarray, sy: int, sx: int, tolerance: float, limit):
        h, w = image.shape[:2]
        r0, c0, r1, c1 = limit if limit else (0, 0, h, w)
        seed_color = image[sy, sx].astype(np.float64)
        mask = np.zeros((h, w), dtype=bool)
        if not (r0 <= sy < r1 and c0 <= sx < c1):
            return mask
        queue = deque([(sy, sx)])
        mask[sy, sx] = True
        while queue:
            y, x = queue.popleft()
            for dy, dx in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                ny, nx = y + dy, x + dx
                if not (r0 <= ny < r1 and c0 <= nx < c1) or mask[ny, nx]:
                    continue
                if np.abs(image[ny, nx] - seed_color).sum() <= tolerance:
                    mask[ny, nx] = True
                    queue.append((ny, nx))
        return mask


class SamSegmenter:
    """Promptable segmentation via a transformers SAM checkpoint."""

    def __init__(self, model_id: str = "facebook/sam-vit-huge", device: str = "cpu"):
        try:
            import torch
            from transformers import SamModel, SamProcessor
        except ImportError as exc:
            raise ModelLoadError("torch/transformers missing; pip install .[models]") from exc
        try:
            self.model = SamModel.from_pretrained(model_id).to(device).eval()
            self.processor = SamProcessor.from_pretrained(model_id)
        except Exception as exc:
            raise ModelLoadError(f"cannot load {model_id}: {exc}") from exc
        self._torch = torch
        self.device = device
        self._embedding_cache: dict[int, object] = {}

    def segment(self, image: np.ndarray, points, box, multimask: bool):
        torch = self._torch
        kwargs = {}
        if points:
            pts = [[[float(x), float(y)] for x, y, _ in points]]
            labels = [[int(label) for _, _, label in points]]
            kwargs["input_points"] = [pts]
            kwargs["input_labels"] = [labels]
        if box is not None:
            kwargs["input_boxes"] = [[[float(v) for v in box]]]
        inputs = self.processor(image, return_tensors="pt", **kwargs).to(self.device)
        with torch.inference_mode():
            outputs = self.model(**inputs, multimask_output=multimask)
        masks = self.processor.image_processor.post_process_masks(
            outputs.pred_masks.cpu(),
            inputs["original_sizes"].cpu(),
            inputs["reshaped_input_sizes"].cpu(),
        )[0][0].numpy().astype(bool)
        scores = outputs.iou_scores.cpu().numpy().reshape(-1).tolist()
        return [m for m in masks], [float(min(max(s, 0.0), 1.0)) for s in scores]


def make_segmenter(model_id: str):
    if model_id == "stub":
        return StubSegmenter()
    return SamSegmenter(model_id)
