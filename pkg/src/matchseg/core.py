"""Feature grids, binary masks, patch/pixel geometry, and their file formats.

Feature tensors travel as "MTFT" files: magic ``MTFT``, u32 version=1,
u32 H, u32 W, u32 C, then H*W*C float32 little-endian, row-major
(patch-major, channel-minor). Masks travel as 8-bit single-channel PNG
(0 = background, any nonzero = foreground).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import (
    BadMagic,
    EmptyResult,
    NonFiniteValue,
    TruncatedFile,
    UnsupportedVersion,
)

MTFT_MAGIC = b"MTFT"
MTFT_VERSION = 1
_HEADER = struct.Struct("<4sIIII")  # magic, version, H, W, C


@dataclass(frozen=True)
class PatchPoint:
    """A cell of the patch grid, addressed (row, col)."""

    row: int
    col: int

    def flat(self, grid_width: int) -> int:
        return self.row * grid_width + self.col


@dataclass(frozen=True)
class PixelPoint:
    """A continuous position in pixel coordinates."""

    x: float
    y: float


@dataclass(frozen=True)
class FeatureMap:
    """Patch-level feature tensor of one image, shape (H, W, C)."""

    data: np.ndarray
    stride_px: int
    origin: str = ""

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float32)
        if arr.ndim != 3:
            raise ValueError(f"feature tensor must be (H, W, C), got shape {arr.shape}")
        if min(arr.shape) < 1:
            raise ValueError(f"feature dims must be >= 1, got {arr.shape}")
        if not np.isfinite(arr).all():
            idx = int(np.flatnonzero(~np.isfinite(arr.reshape(-1)))[0])
            raise NonFiniteValue(f"non-finite feature value at flat index {idx}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def flat_features(self) -> np.ndarray:
        """All patch features as an (H*W, C) matrix, row-major."""
        return self.data.reshape(-1, self.channels)

    def features_at(self, points) -> np.ndarray:
        """Features of the given patch points, stacked (len(points), C)."""
        rows = np.array([p.row for p in points], dtype=np.intp)
        cols = np.array([p.col for p in points], dtype=np.intp)
        return self.data[rows, cols, :]


@dataclass(frozen=True)
class PixelMask:
    """Binary mask at pixel resolution."""

    bits: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.bits, dtype=bool)
        if arr.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    @property
    def height_px(self) -> int:
        return self.bits.shape[0]

    @property
    def width_px(self) -> int:
        return self.bits.shape[1]

    @property
    def area(self) -> int:
        return int(self.bits.sum())

    def union(self, other: "PixelMask") -> "PixelMask":
        return PixelMask(self.bits | other.bits)

    def intersection(self, other: "PixelMask") -> "PixelMask":
        return PixelMask(self.bits & other.bits)

    @staticmethod
    def empty(height_px: int, width_px: int) -> "PixelMask":
        return PixelMask(np.zeros((height_px, width_px), dtype=bool))

    @staticmethod
    def full(height_px: int, width_px: int) -> "PixelMask":
        return PixelMask(np.ones((height_px, width_px), dtype=bool))


def iou(a: PixelMask, b: PixelMask) -> float:
    """Intersection over union; two empty masks count as 1.0."""
    if a.bits.shape != b.bits.shape:
        raise ValueError(f"mask shapes differ: {a.bits.shape} vs {b.bits.shape}")
    union = int((a.bits | b.bits).sum())
    if union == 0:
        return 1.0
    return int((a.bits & b.bits).sum()) / union


# --- MTFT feature files ---

def save_feature_map(fm: FeatureMap, path) -> None:
    payload = np.ascontiguousarray(fm.data, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MTFT_MAGIC, MTFT_VERSION, fm.height, fm.width, fm.channels))
        fh.write(payload.tobytes())


def load_feature_map(path, stride_px: int = 14, origin: str | None = None) -> FeatureMap:
    """Decode an MTFT file, validating magic, length, and finiteness.

    Errors carry the byte offset of the offending datum.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 4 or raw[:4] != MTFT_MAGIC:
        raise BadMagic(f"{path}: expected magic {MTFT_MAGIC!r} at offset 0, got {raw[:4]!r}")
    if len(raw) < _HEADER.size:
        raise TruncatedFile(f"{path}: header truncated at offset {len(raw)} (need {_HEADER.size})")
    _, version, h, w, c = _HEADER.unpack_from(raw, 0)
    if version != MTFT_VERSION:
        raise UnsupportedVersion(f"{path}: version {version} at offset 4, expected {MTFT_VERSION}")
    if min(h, w, c) < 1:
        raise TruncatedFile(f"{path}: degenerate dims H={h} W={w} C={c} in header")
    expected = _HEADER.size + h * w * c * 4
    if len(raw) < expected:
        raise TruncatedFile(
            f"{path}: payload truncated at offset {len(raw)}, expected {expected} bytes"
        )
    values = np.frombuffer(raw, dtype="<f4", count=h * w * c, offset=_HEADER.size)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        off = _HEADER.size + int(bad[0]) * 4
        raise NonFiniteValue(f"{path}: non-finite float at offset {off}")
    data = values.reshape(h, w, c)
    return FeatureMap(data=data, stride_px=stride_px, origin=origin or str(path))


# --- PNG masks ---

def save_mask(mask: PixelMask, path) -> None:
    img = Image.fromarray(mask.bits.astype(np.uint8) * 255, mode="L")
    img.save(path, format="PNG")


def load_mask(path) -> PixelMask:
    img = Image.open(path)
    arr = np.asarray(img.convert("L"))
    return PixelMask(arr != 0)


# --- grid <-> pixel geometry ---

def patch_to_pixel(p: PatchPoint, stride_px: int,
                   image_h: int | None = None, image_w: int | None = None) -> PixelPoint:
    """Center of the patch cell in pixel coordinates, clamped to the image."""
    x = (p.col + 0.5) * stride_px
    y = (p.row + 0.5) * stride_px
    if image_w is not None:
        x = min(x, image_w - 0.5)
    if image_h is not None:
        y = min(y, image_h - 0.5)
    return PixelPoint(x=x, y=y)


def cell_coverage(mask: PixelMask, grid_h: int, grid_w: int, stride_px: int) -> np.ndarray:
    """Fraction of foreground pixels in every patch cell, shape (grid_h, grid_w).

    Cells clipped by the image border use the clipped area as denominator.
    """
    h_px, w_px = mask.height_px, mask.width_px
    if h_px == grid_h * stride_px and w_px == grid_w * stride_px:
        blocks = mask.bits.reshape(grid_h, stride_px, grid_w, stride_px)
        return blocks.mean(axis=(1, 3))
    frac = np.zeros((grid_h, grid_w), dtype=np.float64)
    for r in range(grid_h):
        y0, y1 = r * stride_px, min((r + 1) * stride_px, h_px)
        if y0 >= h_px:
            continue
        for c in range(grid_w):
            x0, x1 = c * stride_px, min((c + 1) * stride_px, w_px)
            if x0 >= w_px:
                continue
            cell = mask.bits[y0:y1, x0:x1]
            frac[r, c] = cell.sum() / cell.size
    return frac


def downsample_mask_to_grid(mask: PixelMask, grid_h: int, grid_w: int,
                            stride_px: int, threshold: float = 0.5) -> set[PatchPoint]:
    """Patches whose cell is covered by the mask at >= threshold fraction."""
    if not (0.0 < threshold <= 1.0):
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    frac = cell_coverage(mask, grid_h, grid_w, stride_px)
    rows, cols = np.nonzero(frac >= threshold)
    selected = {PatchPoint(int(r), int(c)) for r, c in zip(rows, cols)}
    if not selected:
        raise EmptyResult("no patch cell reaches the coverage threshold")
    return selected


def sorted_patches(patches) -> list[PatchPoint]:
    """Deterministic (row-major) ordering of a patch set."""
    return sorted(patches, key=lambda p: (p.row, p.col))
