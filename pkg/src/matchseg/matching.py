"""Patch-level matching between a reference mask and a target grid.

Forward matching sends every reference-mask patch to its most similar
target patch; reverse matching sends those hits back to the reference
grid; the bidirectional filter keeps a forward hit only when its reverse
lands inside the reference mask again. A forward-only and a
reverse-only mode exist for ablations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FeatureMap, PatchPoint, sorted_patches
from .errors import EmptyMatch
from .similarity import CorrespondenceMatrix, cosine_sim_matrix


@dataclass(frozen=True)
class MatchRecord:
    ref_point: PatchPoint
    fwd_point: PatchPoint
    rev_point: PatchPoint
    retained: bool


def _argmax_points(matrix: CorrespondenceMatrix, grid_width: int) -> list[PatchPoint]:
    # np.argmax returns the first maximum, i.e. the smallest flat index on ties.
    flat = np.argmax(matrix.values, axis=1)
    return [PatchPoint(int(f) // grid_width, int(f) % grid_width) for f in flat]


def forward_match(sim_to_target: CorrespondenceMatrix, grid_width: int) -> list[PatchPoint]:
    """Per-row best target patch; ties break toward the smaller flat index."""
    if sim_to_target.rows < 1:
        raise ValueError("forward_match needs at least one source row")
    if sim_to_target.cols % grid_width != 0:
        raise ValueError(
            f"matrix has {sim_to_target.cols} columns, not a multiple of width {grid_width}"
        )
    return _argmax_points(sim_to_target, grid_width)


def reverse_match(sim_to_ref: CorrespondenceMatrix, grid_width: int) -> list[PatchPoint]:
    """Identical contract to forward_match, over the reference grid."""
    return forward_match(sim_to_ref, grid_width)


def _dedup(points: list[PatchPoint]) -> list[PatchPoint]:
    seen = set()
    out = []
    for p in points:
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


def bidirectional_match(
    ref: FeatureMap,
    target: FeatureMap,
    ref_patches: set[PatchPoint],
) -> tuple[list[PatchPoint], list[MatchRecord]]:
    """Forward match, reverse match, then drop forward hits whose reverse
    point falls outside the reference patch set.

    Returns the deduplicated retained target points (first occurrence
    kept) and one record per reference point, dropped ones included.
    """
    if not ref_patches:
        raise ValueError("ref_patches must be nonempty")
    if ref.channels != target.channels:
        raise ValueError(f"channel dims differ: {ref.channels} vs {target.channels}")

    ref_points = sorted_patches(ref_patches)
    sim_fwd = cosine_sim_matrix(ref.features_at(ref_points), target.flat_features())
    fwd_points = forward_match(sim_fwd, target.width)

    sim_rev = cosine_sim_matrix(target.features_at(fwd_points), ref.flat_features())
    rev_points = reverse_match(sim_rev, ref.width)

    records = []
    retained_points = []
    for rp, fp, vp in zip(ref_points, fwd_points, rev_points):
        retained = vp in ref_patches
        records.append(MatchRecord(ref_point=rp, fwd_point=fp, rev_point=vp, retained=retained))
        if retained:
            retained_points.append(fp)

    matched = _dedup(retained_points)
    if not matched:
        raise EmptyMatch("every forward match failed the reverse-consistency filter")
    return matched, records


def forward_only_match(
    ref: FeatureMap,
    target: FeatureMap,
    ref_patches: set[PatchPoint],
) -> list[PatchPoint]:
    """Ablation mode: forward matches without the reverse filter."""
    if not ref_patches:
        raise ValueError("ref_patches must be nonempty")
    ref_points = sorted_patches(ref_patches)
    sim_fwd = cosine_sim_matrix(ref.features_at(ref_points), target.flat_features())
    return _dedup(forward_match(sim_fwd, target.width))


def reverse_only_match(
    ref: FeatureMap,
    target: FeatureMap,
    ref_patches: set[PatchPoint],
) -> list[PatchPoint]:
    """Ablation mode: keep every target patch whose nearest reference
    patch lies on the reference mask."""
    if not ref_patches:
        raise ValueError("ref_patches must be nonempty")
    sim = cosine_sim_matrix(target.flat_features(), ref.flat_features())
    hits = reverse_match(sim, ref.width)
    kept = []
    for flat_idx, hit in enumerate(hits):
        if hit in ref_patches:
            kept.append(PatchPoint(flat_idx // target.width, flat_idx % target.width))
    if not kept:
        raise EmptyMatch("no target patch maps back onto the reference mask")
    return kept
