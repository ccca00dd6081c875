"""Cluster matched points and sample diverse prompt groups.

Matched target patches are clustered by pixel location (k-means++ with
Lloyd refinement), then three kinds of point groups are drawn: within a
cluster (part level), across all matched points (instance level), and
from the cluster centers (global). One box group spanning all matched
points is always added. Every draw comes from the seeded engine PRNG, so a
group list is byte-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SamplerConfig
from .core import PatchPoint, PixelPoint, patch_to_pixel
from .rng import Xoshiro256StarStar


@dataclass(frozen=True)
class ClusterSet:
    """Cluster assignment of a point list plus the centroid of each cluster."""

    k: int
    assignments: tuple[int, ...]
    centers: tuple[PixelPoint, ...]

    def members(self, cluster_id: int) -> list[int]:
        return [i for i, a in enumerate(self.assignments) if a == cluster_id]


@dataclass(frozen=True)
class PromptGroup:
    """One segmenter call: positive points, or a single box."""

    kind: str  # part | instance | global | box
    points: tuple[PixelPoint, ...] = ()
    box: tuple[float, float, float, float] | None = None
    source_cluster: int | None = None

    def __post_init__(self):
        if self.kind == "box":
            if self.points or self.box is None:
                raise ValueError("box group carries a box and no points")
            x0, y0, x1, y1 = self.box
            if x0 > x1 or y0 > y1:
                raise ValueError(f"box not well-ordered: {self.box}")
        else:
            if not self.points or self.box is not None:
                raise ValueError(f"{self.kind} group carries points and no box")


def kmeans_pp(points: list[PixelPoint], k: int, seed: int, max_iter: int = 50) -> ClusterSet:
    """Seeded k-means++ then Lloyd iterations to an assignment fixpoint.

    k is silently reduced to the number of distinct points. Assignment
    ties break toward the smaller center index.
    """
    if not points:
        raise ValueError("kmeans_pp needs at least one point")
    if k < 1:
        raise ValueError("k must be >= 1")
    xy = np.array([[p.x, p.y] for p in points], dtype=np.float64)
    n = len(points)
    k = min(k, len({(p.x, p.y) for p in points}))
    rng = Xoshiro256StarStar(seed)

    centers = np.empty((k, 2), dtype=np.float64)
    centers[0] = xy[rng.randbelow(n)]
    min_d2 = np.sum((xy - centers[0]) ** 2, axis=1)
    for i in range(1, k):
        idx = rng.choice_weighted(min_d2.tolist())
        centers[i] = xy[idx]
        min_d2 = np.minimum(min_d2, np.sum((xy - centers[i]) ** 2, axis=1))

    assignments = np.full(n, -1, dtype=np.intp)
    for _ in range(max(1, max_iter)):
        d2 = np.sum((xy[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        new_assign = np.argmin(d2, axis=1)  # first minimum = smallest center index
        if np.array_equal(new_assign, assignments):
            break
        assignments = new_assign
        for c in range(k):
            mask = assignments == c
            if mask.any():
                centers[c] = xy[mask].mean(axis=0)
            # empty cluster keeps its previous center

    return ClusterSet(
        k=k,
        assignments=tuple(int(a) for a in assignments),
        centers=tuple(PixelPoint(float(cx), float(cy)) for cx, cy in centers),
    )


def _dense_grid_points(grid_h: int, grid_w: int, step: int) -> list[PatchPoint]:
    return [PatchPoint(r, c) for r in range(0, grid_h, step) for c in range(0, grid_w, step)]


def sample_prompt_groups(
    matched: list[PatchPoint],
    clusters: ClusterSet,
    cfg: SamplerConfig,
    seed: int,
    stride_px: int,
    grid_h: int,
    grid_w: int,
) -> list[PromptGroup]:
    """Emit part/instance/global point groups plus the box of all matches.

    Group sizes are clipped to the available population and all draws
    are without replacement within a group; distinct groups may overlap.
    """
    if not matched:
        raise ValueError("matched point list must be nonempty")
    if len(clusters.assignments) != len(matched):
        raise ValueError("clusters were not computed over the matched points")
    rng = Xoshiro256StarStar(seed)
    pixels = [patch_to_pixel(p, stride_px) for p in matched]
    groups: list[PromptGroup] = []

    for cluster_id in range(clusters.k):
        members = [pixels[i] for i in clusters.members(cluster_id)]
        if not members:
            continue
        size = min(cfg.part_group_size, len(members))
        for _ in range(cfg.part_groups_per_cluster):
            pts = rng.sample(members, size)
            groups.append(PromptGroup(kind="part", points=tuple(pts),
                                      source_cluster=cluster_id))

    instance_pool = list(pixels)
    if cfg.instance_from_dense_grid:
        seen = {(p.x, p.y) for p in instance_pool}
        for gp in _dense_grid_points(grid_h, grid_w, cfg.dense_grid_step):
            px = patch_to_pixel(gp, stride_px)
            if (px.x, px.y) not in seen:
                seen.add((px.x, px.y))
                instance_pool.append(px)
    size = min(cfg.instance_group_size, len(instance_pool))
    for _ in range(cfg.instance_groups):
        pts = rng.sample(instance_pool, size)
        groups.append(PromptGroup(kind="instance", points=tuple(pts)))

    center_pool = list(clusters.centers)
    size = min(cfg.global_group_size, len(center_pool))
    for _ in range(cfg.global_groups):
        pts = rng.sample(center_pool, size)
        groups.append(PromptGroup(kind="global", points=tuple(pts)))

    xs = [p.x for p in pixels]
    ys = [p.y for p in pixels]
    groups.append(PromptGroup(kind="box", box=(min(xs), min(ys), max(xs), max(ys))))
    return groups
