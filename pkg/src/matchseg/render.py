"""Overlay rendering of predicted masks for qualitative inspection."""

from __future__ import annotations

import numpy as np
from PIL import Image

from .core import PixelMask

MASK_COLOR = np.array([235, 70, 52], dtype=np.float64)  # fixed palette: red
BACKGROUND_GRAY = 128
ALPHA = 0.5


def render_overlay(mask: PixelMask, out_path, image: np.ndarray | None = None) -> None:
    """Write a PNG with the mask alpha-blended over the image.

    Without an image the mask is drawn on a flat gray canvas. Output is
    bit-stable for identical inputs.
    """
    h, w = mask.bits.shape
    if image is None:
        canvas = np.full((h, w, 3), BACKGROUND_GRAY, dtype=np.float64)
    else:
        canvas = np.asarray(image, dtype=np.float64)
        if canvas.ndim == 2:
            canvas = np.stack([canvas] * 3, axis=-1)
        if canvas.shape[:2] != (h, w):
            raise ValueError(f"image dims {canvas.shape[:2]} do not match mask {(h, w)}")
    blended = canvas.copy()
    blended[mask.bits] = (1.0 - ALPHA) * canvas[mask.bits] + ALPHA * MASK_COLOR
    arr = np.clip(np.rint(blended), 0, 255).astype(np.uint8)
    Image.fromarray(arr, mode="RGB").save(out_path, format="PNG")
