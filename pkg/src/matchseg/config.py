"""Run configuration: sampler/selection knobs, task presets, TOML loading.

Presets carry the published hyperparameters for each benchmark family;
CLI flags override file values which override preset values.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

try:
    import tomllib  # py >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

TASKS = ("semantic", "part", "multi_instance", "vos")
MATCHING_MODES = ("bidirectional", "forward", "reverse")


@dataclass(frozen=True)
class SamplerConfig:
    cluster_count: int = 8
    part_groups_per_cluster: int = 1
    part_group_size: int = 1
    instance_groups: int = 4
    instance_group_size: int = 3
    global_groups: int = 2
    global_group_size: int = 3
    # multi-instance tasks also draw instance-level points from a regular
    # grid of every dense_grid_step-th patch center
    instance_from_dense_grid: bool = False
    dense_grid_step: int = 4
    kmeans_max_iter: int = 50


@dataclass(frozen=True)
class SelectConfig:
    # thresholds; None disables the corresponding filter
    emd_max: float | None = None
    purity_min: float | None = None
    coverage_min: float | None = None
    # score = alpha * (1 - emd) + beta * purity * coverage**lam
    alpha: float = 1.0
    beta: float = 0.0
    lam: float = 0.0
    num_merged: int = 1
    top_k: int | None = None
    dedup_iou: float = 0.95
    emd_support_cap: int = 256


@dataclass(frozen=True)
class RunConfig:
    task: str = "semantic"
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    select: SelectConfig = field(default_factory=SelectConfig)
    grid_threshold: float = 0.5
    matching: str = "bidirectional"
    one_to_one: bool = False  # reserved; only nearest-neighbor matching is implemented
    seed: int = 0
    memory_capacity: int = 4
    memory_decay: float = 0.9

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}, expected one of {TASKS}")
        if self.matching not in MATCHING_MODES:
            raise ValueError(f"unknown matching mode {self.matching!r}")
        if not (0.0 < self.grid_threshold <= 1.0):
            raise ValueError("grid_threshold must be in (0, 1]")
        if not (0.0 < self.memory_decay <= 1.0):
            raise ValueError("memory_decay must be in (0, 1]")
        if self.one_to_one:
            raise NotImplementedError("one-to-one assignment matching is not implemented")


PRESETS: dict[str, RunConfig] = {
    "coco": RunConfig(
        task="multi_instance",
        sampler=SamplerConfig(instance_from_dense_grid=True),
        select=SelectConfig(emd_max=0.67, purity_min=0.02, alpha=1.0, beta=0.0, lam=0.0,
                            num_merged=3),
    ),
    "lvis": RunConfig(
        task="multi_instance",
        sampler=SamplerConfig(instance_from_dense_grid=True),
        select=SelectConfig(emd_max=0.67, purity_min=0.02, alpha=1.0, beta=0.0, lam=0.0,
                            num_merged=3),
    ),
    "fss": RunConfig(
        task="semantic",
        select=SelectConfig(alpha=0.8, beta=0.2, lam=1.0, num_merged=1),
    ),
    "part": RunConfig(
        task="part",
        select=SelectConfig(coverage_min=0.3, alpha=0.5, beta=0.5, lam=0.0, num_merged=1),
    ),
    "vos": RunConfig(
        task="vos",
        select=SelectConfig(emd_max=0.75, alpha=0.4, beta=1.0, lam=1.0, num_merged=1),
    ),
}


def _merge_dataclass(base, overrides: dict):
    """New dataclass instance with the given fields replaced (recursively)."""
    kwargs = {}
    names = {f.name: f for f in dataclasses.fields(base)}
    for key, value in overrides.items():
        if key not in names:
            raise ValueError(f"unknown config key {key!r} for {type(base).__name__}")
        current = getattr(base, key)
        if dataclasses.is_dataclass(current) and isinstance(value, dict):
            kwargs[key] = _merge_dataclass(current, value)
        else:
            kwargs[key] = value
    return dataclasses.replace(base, **kwargs)


def load_config(path=None, preset: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Resolve a RunConfig from preset + optional TOML file + overrides.

    The TOML file may itself name a preset (``preset = "fss"``); sections
    [sampler] and [select] map onto the nested configs.
    """
    file_data: dict = {}
    if path is not None:
        with open(path, "rb") as fh:
            file_data = tomllib.load(fh)
    preset_name = preset or file_data.pop("preset", None)
    if preset_name is not None:
        if preset_name not in PRESETS:
            raise ValueError(f"unknown preset {preset_name!r}, expected one of {sorted(PRESETS)}")
        cfg = PRESETS[preset_name]
    else:
        cfg = RunConfig()
    if file_data:
        cfg = _merge_dataclass(cfg, file_data)
    if overrides:
        cfg = _merge_dataclass(cfg, overrides)
    return cfg


def config_as_dict(cfg: RunConfig) -> dict:
    return dataclasses.asdict(cfg)
