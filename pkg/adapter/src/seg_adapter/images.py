"""Image loading and the per-id image cache used by the server."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ImageDecodeError

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".webp")


def load_image_rgb(path) -> np.ndarray:
    """Decode an image to an (H, W, 3) uint8 array."""
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"))
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise ImageDecodeError(f"cannot decode {path}: {exc}") from exc


class ImageStore:
    """Maps image ids (file stems) to decoded arrays, cached per id."""

    def __init__(self, roots: list):
        self._paths: dict[str, Path] = {}
        self._cache: dict[str, np.ndarray] = {}
        for root in roots:
            root = Path(root)
            files = [root] if root.is_file() else sorted(root.glob("*"))
            for f in files:
                if f.suffix.lower() in IMAGE_SUFFIXES:
                    self._paths[f.stem] = f

    def __contains__(self, image_id: str) -> bool:
        return image_id in self._paths

    def get(self, image_id: str) -> np.ndarray:
        if image_id not in self._paths:
            raise KeyError(image_id)
        if image_id not in self._cache:
            self._cache[image_id] = load_image_rgb(self._paths[image_id])
        return self._cache[image_id]

    def ids(self) -> list[str]:
        return sorted(self._paths)
