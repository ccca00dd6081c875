"""Command-line entry points: match, bench, vos, render."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from .bench import build_oracle, load_episode_manifest, run_bench, run_episode, run_vos
from .config import PRESETS, load_config
from .core import load_mask
from .render import render_overlay
from .segmenter import ExternalSegmenter


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--preset", choices=sorted(PRESETS), default=None,
                        help="named hyperparameter preset")
    parser.add_argument("--config", type=Path, default=None,
                        help="TOML config file (overrides preset)")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--segmenter", default="oracle",
                        help="'oracle' or 'external:<host:port>'")
    parser.add_argument("--num-merged", type=int, default=None)
    parser.add_argument("--report-dir", type=Path, default=None)


def _resolve_config(args):
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.num_merged is not None:
        overrides["select"] = {"num_merged": args.num_merged}
    return load_config(path=args.config, preset=args.preset, overrides=overrides)


def _resolve_segmenter(backend: str, episodes=None):
    if backend == "oracle":
        if episodes is None:
            raise ValueError("oracle backend needs an episode manifest with shapes")
        return build_oracle(episodes)
    if backend.startswith("external:"):
        return ExternalSegmenter(backend.split(":", 1)[1])
    raise ValueError(f"unknown segmenter {backend!r}")


def _cmd_match(args) -> int:
    cfg = _resolve_config(args)
    episodes, stride = load_episode_manifest(args.episodes)
    wanted = [ep for ep in episodes if args.episode in (None, ep.episode_id)]
    if not wanted:
        print(f"episode {args.episode!r} not found", file=sys.stderr)
        return 2
    segmenter = _resolve_segmenter(args.segmenter, wanted)
    _, report = run_episode(wanted[0], cfg, segmenter, stride, report_dir=args.report_dir)
    print(json.dumps(report, sort_keys=True, indent=1))
    return 0


def _cmd_bench(args) -> int:
    cfg = _resolve_config(args)
    segmenter = None
    if args.segmenter != "oracle":
        segmenter = _resolve_segmenter(args.segmenter)
    summary = run_bench(args.episodes, cfg, segmenter=segmenter, report_dir=args.report_dir)
    print(json.dumps({k: v for k, v in summary.items() if k != "config"},
                     sort_keys=True, indent=1))
    return 0


def _cmd_vos(args) -> int:
    cfg = _resolve_config(args)
    segmenter = None
    if args.segmenter != "oracle":
        segmenter = _resolve_segmenter(args.segmenter)
    summary = run_vos(args.manifest, cfg, segmenter=segmenter, report_dir=args.report_dir)
    print(json.dumps({k: v for k, v in summary.items() if k != "config"},
                     sort_keys=True, indent=1))
    return 0


def _cmd_render(args) -> int:
    mask = load_mask(args.mask)
    image = None
    if args.image is not None:
        image = np.asarray(Image.open(args.image).convert("RGB"))
    render_overlay(mask, args.out, image=image)
    print(f"wrote {args.out}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="matchseg",
        description="Training-free one-shot segmentation over precomputed features",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_match = sub.add_parser("match", help="run one episode")
    p_match.add_argument("episodes", type=Path, help="episode manifest JSON")
    p_match.add_argument("--episode", default=None, help="episode id (default: first)")
    _add_common(p_match)
    p_match.set_defaults(func=_cmd_match)

    p_bench = sub.add_parser("bench", help="run an episode list and report metrics")
    p_bench.add_argument("episodes", type=Path)
    _add_common(p_bench)
    p_bench.set_defaults(func=_cmd_bench)

    p_vos = sub.add_parser("vos", help="track a video manifest")
    p_vos.add_argument("manifest", type=Path)
    _add_common(p_vos)
    p_vos.set_defaults(func=_cmd_vos)

    p_render = sub.add_parser("render", help="overlay a mask on an image")
    p_render.add_argument("--mask", type=Path, required=True)
    p_render.add_argument("--image", type=Path, default=None)
    p_render.add_argument("--out", type=Path, required=True)
    p_render.set_defaults(func=_cmd_render)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
