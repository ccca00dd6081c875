"""Adapter CLI: export patch features, serve a segmenter."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import AdapterError
from .extractors import DEFAULT_IMAGE_INPUT, DEFAULT_STRIDE, ExportJob, export_features
from .images import ImageStore
from .segmenters import make_segmenter
from .server import SegmenterServer


def _parse_size(text: str) -> tuple[int, int]:
    if "x" in text:
        h, w = text.split("x", 1)
        return int(h), int(w)
    return int(text), int(text)


def _cmd_export(args) -> int:
    job = ExportJob(
        image_path=args.image,
        model_id=args.model,
        input_size=_parse_size(args.input_size),
        output_path=args.out,
        stride_px=args.stride,
    )
    out = export_features(job)
    gh, gw = job.grid_hw
    print(f"wrote {out} ({gh}x{gw} grid, stride {job.stride_px})")
    return 0


def _cmd_serve(args) -> int:
    store = ImageStore(args.images)
    if not store.ids():
        print("warning: no images found to serve", file=sys.stderr)
    segmenter = make_segmenter(args.model)
    host, _, port = args.addr.rpartition(":")
    server = SegmenterServer(segmenter, store, host=host or "127.0.0.1",
                             port=int(port or 0))
    print(f"serving {args.model} on {server.address} "
          f"({len(store.ids())} images)", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="seg-adapter",
        description="Bridge real vision models to the one-shot segmentation engine",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_export = sub.add_parser("export", help="extract patch features to an MTFT file")
    p_export.add_argument("--image", type=Path, required=True)
    p_export.add_argument("--out", type=Path, required=True)
    p_export.add_argument("--model", default="stub",
                          help="'stub' or an encoder id (e.g. dinov2_vitl14)")
    p_export.add_argument("--input-size", default=str(DEFAULT_IMAGE_INPUT),
                          help="square size or HxW (e.g. 518 or 504x896)")
    p_export.add_argument("--stride", type=int, default=DEFAULT_STRIDE)
    p_export.set_defaults(func=_cmd_export)

    p_serve = sub.add_parser("serve", help="serve a segmenter on the wire protocol")
    p_serve.add_argument("--addr", default="127.0.0.1:7878")
    p_serve.add_argument("--model", default="stub",
                         help="'stub' or a segmenter id (e.g. facebook/sam-vit-huge)")
    p_serve.add_argument("--images", type=Path, nargs="+", required=True,
                         help="files or directories; image id = file stem")
    p_serve.set_defaults(func=_cmd_serve)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
