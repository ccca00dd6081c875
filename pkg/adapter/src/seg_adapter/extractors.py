"""Patch-feature extractors and the MTFT export job.

The published recipe uses a ViT-L/14 all-purpose encoder at 518x518
input (37x37 patch grid) for image tasks and 896x504 for video. The
``stub`` extractor is a deterministic, weight-free stand-in (pooled
color statistics under a fixed projection) so the export path and file
format can be exercised anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ModelLoadError
from .formats import write_mtft
from .images import load_image_rgb

DEFAULT_IMAGE_INPUT = 518   # square input for image tasks
DEFAULT_VIDEO_INPUT = (504, 896)  # (height, width) for video tasks
DEFAULT_STRIDE = 14


@dataclass(frozen=True)
class ExportJob:
    image_path: Path
    model_id: str            # "stub" or an encoder id such as "dinov2_vitl14"
    input_size: tuple[int, int]  # (height, width) the image is resized to
    output_path: Path
    stride_px: int = DEFAULT_STRIDE

    def __post_init__(self):
        h, w = self.input_size
        if h % self.stride_px or w % self.stride_px:
            raise ValueError(
                f"input size {self.input_size} must be a multiple of the "
                f"patch stride {self.stride_px}"
            )

    @property
    def grid_hw(self) -> tuple[int, int]:
        return self.input_size[0] // self.stride_px, self.input_size[1] // self.stride_px


class StubExtractor:
    """Deterministic pooled-color features; no weights required.

    Per patch: per-channel mean and standard deviation, pushed through a
    fixed random projection to ``channels`` dims. Appearance only, no
    positional component, so the same texture matches across images.
    """

    def __init__(self, channels: int = 16):
        self.channels = channels
        self._proj = np.random.default_rng(0xC0FFEE).normal(size=(6, channels))

    def extract(self, image: np.ndarray, grid_hw: tuple[int, int],
                stride: int) -> np.ndarray:
        gh, gw = grid_hw
        img = np.asarray(
            Image.fromarray(image).resize((gw * stride, gh * stride), Image.BILINEAR),
            dtype=np.float64,
        ) / 255.0
        feats = np.empty((gh, gw, 6))
        for r in range(gh):
            for c in range(gw):
                cell = img[r * stride:(r + 1) * stride, c * stride:(c + 1) * stride]
                pixels = cell.reshape(-1, 3)
                feats[r, c, :3] = pixels.mean(axis=0)
                feats[r, c, 3:] = pixels.std(axis=0)
        out = feats @ self._proj
        return out.astype(np.float32)


class DinoV2Extractor:
    """Patch tokens from a DINOv2 encoder via torch hub (weights required)."""

    def __init__(self, model_id: str = "dinov2_vitl14", device: str = "cpu"):
        try:
            import torch
        except ImportError as exc:
            raise ModelLoadError("torch is not installed; pip install .[models]") from exc
        self._torch = torch
        try:
            self.model = torch.hub.load("facebookresearch/dinov2", model_id)
        except Exception as exc:
            raise ModelLoadError(f"cannot load {model_id}: {exc}") from exc
        self.model.eval().to(device)
        self.device = device

    def extract(self, image: np.ndarray, grid_hw: tuple[int, int],
                stride: int) -> np.ndarray:
        torch = self._torch
        gh, gw = grid_hw
        img = Image.fromarray(image).resize((gw * stride, gh * stride), Image.BILINEAR)
        arr = np.asarray(img, dtype=np.float32) / 255.0
        mean = np.array([0.485, 0.456, 0.406], dtype=np.float32)
        std = np.array([0.229, 0.224, 0.225], dtype=np.float32)
        tensor = torch.from_numpy(((arr - mean) / std).transpose(2, 0, 1))[None]
        with torch.inference_mode():
            tokens = self.model.forward_features(tensor.to(self.device))
            patch = tokens["x_norm_patchtokens"][0].cpu().numpy()
        return patch.reshape(gh, gw, -1).astype(np.float32)


def make_extractor(model_id: str):
    if model_id == "stub":
        return StubExtractor()
    return DinoV2Extractor(model_id)


def export_features(job: ExportJob, extractor=None) -> Path:
    """Run the extractor on one image and write the MTFT file.

    Raises ImageDecodeError for unreadable inputs and ModelLoadError when
    the requested encoder cannot be loaded.
    """
    image = load_image_rgb(job.image_path)
    if extractor is None:
        extractor = make_extractor(job.model_id)
    feats = extractor.extract(image, job.grid_hw, job.stride_px)
    if feats.shape[:2] != job.grid_hw:
        raise ValueError(f"extractor produced grid {feats.shape[:2]}, expected {job.grid_hw}")
    if not np.isfinite(feats).all():
        raise ValueError("extractor produced non-finite values")
    write_mtft(feats, job.output_path)
    return Path(job.output_path)
