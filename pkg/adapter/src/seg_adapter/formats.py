"""The engine-facing interchange formats, written from their byte-level
definitions (this package deliberately does not import the engine).

MTFT: magic ``MTFT``, u32 version=1, u32 H, u32 W, u32 C, then H*W*C
float32 little-endian, row-major. RLE: row-major alternating run
lengths starting with the count of false pixels.
"""

from __future__ import annotations

import struct

import numpy as np

MTFT_MAGIC = b"MTFT"
MTFT_VERSION = 1
_HEADER = struct.Struct("<4sIIII")


def write_mtft(features: np.ndarray, path) -> None:
    """Write an (H, W, C) float array as an MTFT file."""
    arr = np.ascontiguousarray(features, dtype="<f4")
    if arr.ndim != 3:
        raise ValueError(f"features must be (H, W, C), got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("features contain non-finite values")
    h, w, c = arr.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MTFT_MAGIC, MTFT_VERSION, h, w, c))
        fh.write(arr.tobytes())


def read_mtft(path) -> np.ndarray:
    """Read an MTFT file back (used for self-checks)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    magic, version, h, w, c = _HEADER.unpack_from(raw, 0)
    if magic != MTFT_MAGIC or version != MTFT_VERSION:
        raise ValueError(f"{path} is not an MTFT v{MTFT_VERSION} file")
    values = np.frombuffer(raw, dtype="<f4", count=h * w * c, offset=_HEADER.size)
    return values.reshape(h, w, c)


def rle_encode(bits: np.ndarray) -> list[int]:
    flat = np.asarray(bits, dtype=bool).reshape(-1)
    if flat.size == 0:
        return []
    changes = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], changes, [flat.size]))
    runs = np.diff(bounds).tolist()
    if flat[0]:
        runs.insert(0, 0)
    return [int(r) for r in runs]
