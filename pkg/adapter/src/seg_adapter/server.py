"""Wire-protocol server: newline-delimited JSON requests over TCP.

One model call runs at a time (a lock serializes them); any protocol
violation is answered with a structured error object instead of closing
the connection.
"""

from __future__ import annotations

import json
import socket
import threading

from .formats import rle_encode
from .images import ImageStore


def _error(code: str, message: str) -> str:
    return json.dumps({"error": {"code": code, "message": message}}, sort_keys=True)


def _response(masks, confidences) -> str:
    payload = {
        "masks": [
            {"h": int(m.shape[0]), "w": int(m.shape[1]), "rle": rle_encode(m)}
            for m in masks
        ],
        "confidences": [float(c) for c in confidences],
    }
    return json.dumps(payload, sort_keys=True)


class SegmenterServer:
    """Serves a promptable segmenter backend over the wire protocol."""

    def __init__(self, segmenter, store: ImageStore, host: str = "127.0.0.1",
                 port: int = 0):
        self.segmenter = segmenter
        self.store = store
        self._model_lock = threading.Lock()
        self._sock = socket.create_server((host, port))
        self._sock.settimeout(0.5)
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []

    @property
    def address(self) -> str:
        host, port = self._sock.getsockname()
        return f"{host}:{port}"

    def handle_line(self, line: str) -> str:
        """One request in, one reply out; never raises."""
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            return _error("bad_json", str(exc))
        if not isinstance(payload, dict) or "image_id" not in payload:
            return _error("bad_request", "request must be an object with image_id")
        points = payload.get("points") or []
        box = payload.get("box")
        multimask = bool(payload.get("multimask", True))
        if not points and box is None:
            return _error("bad_request", "request needs points or a box")
        image_id = payload["image_id"]
        if image_id not in self.store:
            return _error("unknown_image", f"image {image_id!r} is not served here")
        try:
            points = [(float(x), float(y), int(label)) for x, y, label in points]
            if box is not None:
                box = tuple(float(v) for v in box)
        except (TypeError, ValueError) as exc:
            return _error("bad_request", f"malformed prompt: {exc}")
        try:
            image = self.store.get(image_id)
            with self._model_lock:
                masks, confidences = self.segmenter.segment(image, points, box, multimask)
        except Exception as exc:
            return _error("segmenter_error", str(exc))
        return _response(masks, confidences)

    def _client_loop(self, conn: socket.socket) -> None:
        reader = conn.makefile("r", encoding="utf-8", newline="\n")
        try:
            while not self._stop.is_set():
                line = reader.readline()
                if not line:
                    break
                reply = self.handle_line(line.rstrip("\n"))
                conn.sendall(reply.encode("utf-8") + b"\n")
        except OSError:
            pass
        finally:
            conn.close()

    def serve_forever(self) -> None:
        while not self._stop.is_set():
            try:
                conn, _ = self._sock.accept()
            except socket.timeout:
                continue
            except OSError:
                break
            thread = threading.Thread(target=self._client_loop, args=(conn,), daemon=True)
            thread.start()
            self._threads.append(thread)

    def start_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread

    def shutdown(self) -> None:
        self._stop.set()
        self._sock.close()
