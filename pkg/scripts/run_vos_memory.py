#!/usr/bin/env python3
"""Sweep the tracking memory capacity on synthetic occlusion videos and
print the J&F per capacity (the four-frame memory should win)."""

import argparse
from dataclasses import replace

import numpy as np

from matchseg.config import PRESETS
from matchseg.metrics import j_and_f
from matchseg.synthetic import drift_video
from matchseg.tracker import track_video


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--videos", type=int, default=20)
    parser.add_argument("--capacities", type=int, nargs="+", default=[1, 2, 4, 6])
    parser.add_argument("--seed", type=int, default=2)
    args = parser.parse_args()

    print(f"{'capacity':>9}  {'J':>6}  {'F':>6}  {'J&F':>6}")
    for cap in args.capacities:
        cfg = replace(PRESETS["vos"], seed=args.seed, memory_capacity=cap)
        js, fs, jfs = [], [], []
        for seed in range(args.videos):
            video = drift_video(seed)
            tracks = track_video(video.frames, video.reference_masks,
                                 video.oracle, cfg)
            gt = video.ground_truth["1"]
            j, f, jf = j_and_f(tracks["1"][1:], gt[1:])
            js.append(j)
            fs.append(f)
            jfs.append(jf)
        print(f"{cap:>9}  {np.mean(js):.3f}  {np.mean(fs):.3f}  {np.mean(jfs):.3f}")


if __name__ == "__main__":
    main()
