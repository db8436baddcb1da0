"""End-to-end pruning: segmentation, budgeting, and per-segment token selection.

Segments are mutually independent once budgets are fixed, so they can be
pruned on a worker pool; results are merged in segment order and are
identical whatever the worker count. The pool size comes from the
``MMG_THREADS`` environment variable (0 or unset means automatic).
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .budgeting import allocate, order_segments
from .core import (
    PruneConfig,
    SegmentBudget,
    SelectionResult,
    VideoTokens,
    normalize,
)
from .errors import InvalidInputError
from .evaluation import QualityModel, coverage, quality, redundancy
from .pruning import prune_segment
from .segmentation import segment_prepared

_THREADS_ENV = "MMG_THREADS"


def worker_count(segment_count: int) -> int:
    """Worker pool size: MMG_THREADS, with 0/unset meaning automatic."""
    raw = os.environ.get(_THREADS_ENV, "0")
    try:
        requested = int(raw)
    except ValueError:
        raise InvalidInputError(f"{_THREADS_ENV} must be an integer, got {raw!r}")
    if requested < 0:
        raise InvalidInputError(f"{_THREADS_ENV} must be >= 0, got {requested}")
    if requested == 0:
        requested = min(os.cpu_count() or 1, 8)
    return max(1, min(requested, segment_count))


def prune_video(tokens: VideoTokens, config: PruneConfig) -> SelectionResult:
    """Run the full three-stage pipeline and return the kept-token selection."""
    work = normalize(tokens) if config.normalize_tokens else tokens
    seg = segment_prepared(work, config.tau)
    order, mv = order_segments(seg, config.lam)
    alloc = allocate(
        mv, seg, config, work.tokens_per_frame, work.total_tokens, order=order
    )

    workers = worker_count(len(seg))

    def one(k: int) -> list[np.ndarray]:
        return prune_segment(work, seg.segments[k], alloc.frame_counts[k], config.knn)

    if workers > 1 and len(seg) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_segment = list(pool.map(one, range(len(seg))))
    else:
        per_segment = [one(k) for k in range(len(seg))]

    kept = [idx for seg_kept in per_segment for idx in seg_kept]
    budgets = [
        SegmentBudget(
            start=s,
            end=e,
            ratio=alloc.ratios[k],
            per_frame_count=alloc.base_counts[k],
            marginal_value=alloc.mv[k],
        )
        for k, (s, e) in enumerate(seg.segments)
    ]
    return SelectionResult(kept=kept, segments=budgets)


def compute_metrics(
    tokens: VideoTokens, config: PruneConfig, result: SelectionResult
) -> dict:
    """Coverage/redundancy/quality of a selection, on the tensor the pipeline saw."""
    work = normalize(tokens) if config.normalize_tokens else tokens
    model = QualityModel(beta=config.beta)
    flat = result.flat_indices(work.tokens_per_frame)
    return {
        "coverage": coverage(result, work),
        "redundancy": redundancy(result, work) if len(flat) >= 2 else None,
        "quality": quality(flat, work, model),
        "total_kept": int(result.total_kept),
        "retention_achieved": result.total_kept / work.total_tokens,
    }


def config_echo(config: PruneConfig) -> dict:
    return {
        "ratio": config.retention_ratio,
        "min_ratio": config.min_ratio,
        "tau": config.tau,
        "lambda": config.lam,
        "beta": config.beta,
        "knn": config.knn,
        "normalize": config.normalize_tokens,
        "seed": config.seed,
    }


def result_document(
    tokens: VideoTokens,
    config: PruneConfig,
    result: SelectionResult,
    metrics: dict | None = None,
) -> dict:
    """JSON-ready result with a fixed key order (stable across runs)."""
    doc = {
        "config": config_echo(config),
        "input": {
            "frames": tokens.frames,
            "tokens_per_frame": tokens.tokens_per_frame,
            "dim": tokens.dim,
        },
        "segments": [
            {
                "start": b.start,
                "end": b.end,
                "ratio": b.ratio,
                "per_frame_count": b.per_frame_count,
                "marginal_value": b.marginal_value,
            }
            for b in result.segments
        ],
        "kept": [[int(i) for i in idx] for idx in result.kept],
    }
    if metrics is not None:
        doc["metrics"] = metrics
    return doc


def dumps_document(doc: dict) -> str:
    """Serialize a result document deterministically (insertion-ordered keys)."""
    return json.dumps(doc, indent=2) + "\n"
