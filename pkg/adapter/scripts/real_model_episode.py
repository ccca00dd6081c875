#!/usr/bin/env python3
"""Manual real-weights smoke episode: DINOv2 features + SAM serving +
the engine's matching, on one reference/target image pair.

Requires downloadable weights (pip install .[models]) and the engine
package. Example:

    python scripts/real_model_episode.py \
        --ref ref.jpg --ref-mask ref_mask.png \
        --target target.jpg --gt target_mask.png
"""

import argparse
import tempfile
from pathlib import Path

from seg_adapter.extractors import ExportJob, export_features, make_extractor
from seg_adapter.images import ImageStore
from seg_adapter.segmenters import make_segmenter
from seg_adapter.server import SegmenterServer

import matchseg


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--ref", type=Path, required=True)
    parser.add_argument("--ref-mask", type=Path, required=True)
    parser.add_argument("--target", type=Path, required=True)
    parser.add_argument("--gt", type=Path, default=None)
    parser.add_argument("--encoder", default="dinov2_vitl14")
    parser.add_argument("--segmenter", default="facebook/sam-vit-huge")
    parser.add_argument("--input-size", type=int, default=518)
    parser.add_argument("--stride", type=int, default=14)
    parser.add_argument("--out", type=Path, default=Path("prediction.png"))
    args = parser.parse_args()

    extractor = make_extractor(args.encoder)
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        feats = {}
        for name, path in (("ref", args.ref), ("target", args.target)):
            job = ExportJob(image_path=path, model_id=args.encoder,
                            input_size=(args.input_size, args.input_size),
                            output_path=tmp / f"{name}.mtft", stride_px=args.stride)
            feats[name] = export_features(job, extractor=extractor)

        store = ImageStore([args.target])
        server = SegmenterServer(make_segmenter(args.segmenter), store)
        server.start_background()
        client = matchseg.ExternalSegmenter(server.address)

        ref_fm = matchseg.load_feature_map(feats["ref"], stride_px=args.stride)
        tgt_fm = matchseg.load_feature_map(feats["target"], stride_px=args.stride)
        ref_mask = matchseg.load_mask(args.ref_mask)
        cfg = matchseg.load_config(preset="fss")
        result = matchseg.run_pipeline(
            ref_fm, ref_mask, tgt_fm, args.target.stem, client, cfg,
            image_hw=ref_mask.bits.shape,
        )
        client.close()
        server.shutdown()

    matchseg.save_mask(result.mask, args.out)
    print(f"prediction written to {args.out} (area {result.mask.area} px)")
    if args.gt is not None:
        gt = matchseg.load_mask(args.gt)
        score = matchseg.iou(result.mask, gt)
        print(f"IoU vs ground truth: {score:.3f}")
        return 0 if score >= 0.5 else 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
