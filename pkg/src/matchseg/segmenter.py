"""Promptable-segmenter backends.

OracleSegmenter answers prompts from registered ground-truth shapes
(with optional part-of hierarchy) and exists so the whole engine can be
tested without a neural segmenter. ExternalSegmenter speaks the JSON/RLE
wire protocol to a real segmenter service.
"""

from __future__ import annotations

import socket
from dataclasses import dataclass, field

import numpy as np

from .core import PixelMask
from .errors import BackendUnavailable, DuplicateImage, ProtocolError, UnknownImage
from .wire import decode_response, encode_request


@dataclass(frozen=True)
class SegmentRequest:
    image_id: str
    points: tuple[tuple[float, float, int], ...] = ()  # (x, y, label), label 1 = positive
    box: tuple[float, float, float, float] | None = None
    multimask: bool = True

    def __post_init__(self):
        if not self.points and self.box is None:
            raise ValueError("request needs points or a box")


@dataclass(frozen=True)
class SegmentResponse:
    masks: tuple[PixelMask, ...]
    confidences: tuple[float, ...]

    def __post_init__(self):
        if len(self.masks) != len(self.confidences):
            raise ValueError("masks and confidences differ in length")
        if not self.masks:
            raise ValueError("a response carries at least one mask")


@dataclass(frozen=True)
class OracleShape:
    """A ground-truth region; parent links model whole/part ambiguity."""

    mask: PixelMask
    shape_id: str
    parent: str | None = None


@dataclass
class _RegisteredImage:
    height_px: int
    width_px: int
    shapes: list[OracleShape] = field(default_factory=list)


class OracleSegmenter:
    """Synthetic segmenter over registered shapes.

    Point prompts return every shape containing a positive point, ranked
    by (points contained desc, area asc, registration order) so child
    shapes precede their parents; a box prompt returns the shape with
    maximal IoU against the box region. Confidence is 1.0 for a shape
    containing every positive point (or the box winner), else 0.0. A
    prompt hitting nothing yields one empty mask at confidence 0.
    """

    def __init__(self):
        self._images: dict[str, _RegisteredImage] = {}

    def register(self, image_id: str, height_px: int, width_px: int,
                 shapes: list[OracleShape]) -> None:
        if image_id in self._images:
            raise DuplicateImage(f"image {image_id!r} already registered")
        for s in shapes:
            if s.mask.bits.shape != (height_px, width_px):
                raise ValueError(f"shape {s.shape_id!r} dims do not match the image")
        self._images[image_id] = _RegisteredImage(height_px, width_px, list(shapes))

    def registered_shapes(self, image_id: str) -> list[OracleShape]:
        if image_id not in self._images:
            raise UnknownImage(f"image {image_id!r} was never registered")
        return list(self._images[image_id].shapes)

    def segment(self, req: SegmentRequest) -> SegmentResponse:
        if req.image_id not in self._images:
            raise UnknownImage(f"image {req.image_id!r} was never registered")
        img = self._images[req.image_id]
        if req.points:
            return self._segment_points(img, req)
        return self._segment_box(img, req)

    def _segment_points(self, img: _RegisteredImage, req: SegmentRequest) -> SegmentResponse:
        positives = [(x, y) for x, y, label in req.points if label == 1]
        scored = []
        for order, shape in enumerate(img.shapes):
            contained = sum(1 for x, y in positives if self._hit(shape.mask, x, y))
            if contained > 0:
                scored.append((-contained, shape.mask.area, order, shape))
        if not scored:
            empty = PixelMask.empty(img.height_px, img.width_px)
            return SegmentResponse(masks=(empty,), confidences=(0.0,))
        scored.sort(key=lambda t: t[:3])
        limit = 3 if req.multimask else 1
        masks, confs = [], []
        for neg_contained, _, _, shape in scored[:limit]:
            masks.append(shape.mask)
            confs.append(1.0 if -neg_contained == len(positives) else 0.0)
        return SegmentResponse(masks=tuple(masks), confidences=tuple(confs))

    def _segment_box(self, img: _RegisteredImage, req: SegmentRequest) -> SegmentResponse:
        x0, y0, x1, y1 = req.box
        best = None
        for order, shape in enumerate(img.shapes):
            box_mask = self._box_mask(img, x0, y0, x1, y1)
            inter = int((shape.mask.bits & box_mask).sum())
            union = int((shape.mask.bits | box_mask).sum())
            score = inter / union if union else 0.0
            if best is None or score > best[0]:
                best = (score, order, shape)
        if best is None or best[0] == 0.0:
            empty = PixelMask.empty(img.height_px, img.width_px)
            return SegmentResponse(masks=(empty,), confidences=(0.0,))
        return SegmentResponse(masks=(best[2].mask,), confidences=(1.0,))

    @staticmethod
    def _hit(mask: PixelMask, x: float, y: float) -> bool:
        col, row = int(x), int(y)
        if not (0 <= row < mask.height_px and 0 <= col < mask.width_px):
            return False
        return bool(mask.bits[row, col])

    @staticmethod
    def _box_mask(img: _RegisteredImage, x0, y0, x1, y1):
        box = np.zeros((img.height_px, img.width_px), dtype=bool)
        r0 = max(0, int(y0))
        r1 = min(img.height_px, int(y1) + 1)
        c0 = max(0, int(x0))
        c1 = min(img.width_px, int(x1) + 1)
        if r0 < r1 and c0 < c1:
            box[r0:r1, c0:c1] = True
        return box


class ExternalSegmenter:
    """Client for a segmenter service speaking the wire protocol over TCP."""

    def __init__(self, addr: str, timeout: float = 30.0):
        host, _, port = addr.rpartition(":")
        if not host or not port.isdigit():
            raise ValueError(f"expected host:port, got {addr!r}")
        self._host = host
        self._port = int(port)
        self._timeout = timeout
        self._sock: socket.socket | None = None
        self._reader = None

    def _connect(self):
        if self._sock is not None:
            return
        try:
            self._sock = socket.create_connection(
                (self._host, self._port), timeout=self._timeout
            )
            self._reader = self._sock.makefile("r", encoding="utf-8", newline="\n")
        except OSError as exc:
            self._sock = None
            raise BackendUnavailable(f"cannot reach {self._host}:{self._port}: {exc}") from exc

    def close(self):
        if self._sock is not None:
            try:
                self._sock.close()
            finally:
                self._sock = None
                self._reader = None

    def segment(self, req: SegmentRequest) -> SegmentResponse:
        self._connect()
        line = encode_request(req.image_id, req.points, req.box, req.multimask)
        try:
            self._sock.sendall(line.encode("utf-8") + b"\n")
            reply = self._reader.readline()
        except OSError as exc:
            self.close()
            raise BackendUnavailable(f"connection lost: {exc}") from exc
        if not reply:
            self.close()
            raise BackendUnavailable("segmenter closed the connection")
        try:
            masks, confidences = decode_response(reply)
        except ProtocolError as exc:
            if "unknown_image" in str(exc):
                raise UnknownImage(str(exc)) from exc
            raise
        return SegmentResponse(masks=tuple(masks), confidences=tuple(confidences))
