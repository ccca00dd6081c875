"""Segmenter wire protocol: newline-delimited JSON with RLE-packed masks.

Request:  {"image_id": str, "points": [[x, y, label], ...],
           "box": [x0, y0, x1, y1] | null, "multimask": bool}
Response: {"masks": [{"h": int, "w": int, "rle": [int, ...]}, ...],
           "confidences": [float, ...]}
Errors:   {"error": {"code": str, "message": str}}

RLE is row-major alternating run lengths, starting with the count of
false pixels (possibly 0).
"""

from __future__ import annotations

import json

import numpy as np

from .core import PixelMask
from .errors import ProtocolError


def rle_encode(mask: PixelMask) -> list[int]:
    flat = mask.bits.reshape(-1)
    if flat.size == 0:
        return []
    changes = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], changes, [flat.size]))
    runs = np.diff(bounds).tolist()
    if flat[0]:
        runs.insert(0, 0)
    return [int(r) for r in runs]


def rle_decode(h: int, w: int, runs: list[int]) -> PixelMask:
    total = sum(runs)
    if total != h * w:
        raise ProtocolError(f"RLE runs sum to {total}, expected {h * w}")
    flat = np.zeros(h * w, dtype=bool)
    pos = 0
    value = False
    for run in runs:
        if run < 0:
            raise ProtocolError(f"negative run length {run}")
        if value:
            flat[pos:pos + run] = True
        pos += run
        value = not value
    return PixelMask(flat.reshape(h, w))


def encode_request(image_id: str, points, box, multimask: bool) -> str:
    payload = {
        "image_id": image_id,
        "points": [[float(x), float(y), int(label)] for x, y, label in points],
        "box": None if box is None else [float(v) for v in box],
        "multimask": bool(multimask),
    }
    return json.dumps(payload, sort_keys=True)


def decode_request(line: str) -> dict:
    try:
        payload = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"request is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or "image_id" not in payload:
        raise ProtocolError("request must be an object with an image_id")
    payload.setdefault("points", [])
    payload.setdefault("box", None)
    payload.setdefault("multimask", True)
    if not payload["points"] and payload["box"] is None:
        raise ProtocolError("request needs points or a box")
    return payload


def encode_response(masks: list[PixelMask], confidences: list[float]) -> str:
    if len(masks) != len(confidences):
        raise ValueError("masks and confidences differ in length")
    payload = {
        "masks": [
            {"h": m.height_px, "w": m.width_px, "rle": rle_encode(m)} for m in masks
        ],
        "confidences": [float(c) for c in confidences],
    }
    return json.dumps(payload, sort_keys=True)


def encode_error(code: str, message: str) -> str:
    return json.dumps({"error": {"code": code, "message": message}}, sort_keys=True)


def decode_response(line: str) -> tuple[list[PixelMask], list[float]]:
    try:
        payload = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"response is not valid JSON: {exc}") from exc
    if "error" in payload:
        err = payload["error"]
        raise ProtocolError(f"{err.get('code', 'error')}: {err.get('message', '')}")
    if "masks" not in payload or "confidences" not in payload:
        raise ProtocolError("response missing masks/confidences")
    masks = [rle_decode(int(m["h"]), int(m["w"]), m["rle"]) for m in payload["masks"]]
    confidences = [float(c) for c in payload["confidences"]]
    if len(masks) != len(confidences):
        raise ProtocolError("masks and confidences differ in length")
    return masks, confidences
