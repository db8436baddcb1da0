"""vidprune: budget-constrained pruning of video visual-token tensors.

The pipeline keeps a configurable fraction of a video's visual tokens in
three stages: contiguous segmentation by adjacent-frame similarity, dynamic
per-segment budget allocation driven by each segment's marginal value at its
selection moment, and in-segment token selection via density peaks guided by
what earlier frames already contributed. Evaluation utilities provide an
exhaustive quality oracle, coverage/redundancy diagnostics, and synthetic
videos with planted ground truth.
"""

from .budgeting import BudgetAllocation, allocate, marginal_value, order_segments, ordering_trace
from .core import (
    PruneConfig,
    SegmentBudget,
    SelectionResult,
    VideoTokens,
    cosine_sim,
    frame_embedding,
    normalize,
)
from .errors import InfeasibleBudgetError, InvalidInputError, VidpruneError
from .evaluation import (
    QualityModel,
    SegmentSpec,
    SyntheticSpec,
    coverage,
    generate_synthetic,
    oracle_best_subset,
    quality,
    redundancy,
    sweep_lambda,
)
from .pipeline import compute_metrics, prune_video, result_document
from .pruning import GuideSet, TokenScores, dpc_knn_scores, prune_frame, prune_segment, tg_dpc_scores
from .segmentation import Segmentation, find_boundaries, merge_singletons, segment_video
from .tensorfile import read_tokens, write_tokens

__version__ = "0.1.0"

__all__ = [
    "BudgetAllocation",
    "GuideSet",
    "InfeasibleBudgetError",
    "InvalidInputError",
    "PruneConfig",
    "QualityModel",
    "SegmentBudget",
    "SegmentSpec",
    "Segmentation",
    "SelectionResult",
    "SyntheticSpec",
    "TokenScores",
    "VideoTokens",
    "VidpruneError",
    "allocate",
    "compute_metrics",
    "cosine_sim",
    "coverage",
    "dpc_knn_scores",
    "find_boundaries",
    "frame_embedding",
    "generate_synthetic",
    "marginal_value",
    "merge_singletons",
    "normalize",
    "oracle_best_subset",
    "order_segments",
    "ordering_trace",
    "prune_frame",
    "prune_segment",
    "prune_video",
    "quality",
    "read_tokens",
    "redundancy",
    "result_document",
    "segment_video",
    "sweep_lambda",
    "tg_dpc_scores",
    "write_tokens",
    "__version__",
]
