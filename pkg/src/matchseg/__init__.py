"""Training-free one-shot segmentation engine.

Dense cross-image feature matching proposes prompts for a promptable
segmenter; optimal-transport scoring selects and merges the proposal
masks. Works on precomputed feature tensors with pluggable segmenter
backends, plus a video tracker and an evaluation harness.
"""

from .config import PRESETS, RunConfig, SamplerConfig, SelectConfig, load_config
from .core import (
    FeatureMap,
    PatchPoint,
    PixelMask,
    PixelPoint,
    downsample_mask_to_grid,
    iou,
    load_feature_map,
    load_mask,
    patch_to_pixel,
    save_feature_map,
    save_mask,
)
from .emd import TransportProblem, emd, proposal_emd
from .matching import bidirectional_match, forward_match, reverse_match
from .metrics import boundary_f_measure, j_and_f, miou
from .pipeline import PipelineResult, run_pipeline
from .proposals import ProposalScore, purity_coverage, select_and_merge
from .sampling import ClusterSet, PromptGroup, kmeans_pp, sample_prompt_groups
from .segmenter import (
    ExternalSegmenter,
    OracleSegmenter,
    OracleShape,
    SegmentRequest,
    SegmentResponse,
)
from .similarity import CorrespondenceMatrix, cosine_sim_matrix, submatrix_rows
from .tracker import MemoryEntry, MemoryState, effective_score, track_frame, track_video

__version__ = "0.1.0"

__all__ = [
    "PRESETS",
    "RunConfig",
    "SamplerConfig",
    "SelectConfig",
    "load_config",
    "FeatureMap",
    "PatchPoint",
    "PixelMask",
    "PixelPoint",
    "downsample_mask_to_grid",
    "iou",
    "load_feature_map",
    "load_mask",
    "patch_to_pixel",
    "save_feature_map",
    "save_mask",
    "TransportProblem",
    "emd",
    "proposal_emd",
    "bidirectional_match",
    "forward_match",
    "reverse_match",
    "boundary_f_measure",
    "j_and_f",
    "miou",
    "PipelineResult",
    "run_pipeline",
    "ProposalScore",
    "purity_coverage",
    "select_and_merge",
    "ClusterSet",
    "PromptGroup",
    "kmeans_pp",
    "sample_prompt_groups",
    "ExternalSegmenter",
    "OracleSegmenter",
    "OracleShape",
    "SegmentRequest",
    "SegmentResponse",
    "CorrespondenceMatrix",
    "cosine_sim_matrix",
    "submatrix_rows",
    "MemoryEntry",
    "MemoryState",
    "effective_score",
    "track_frame",
    "track_video",
    "__version__",
]
