"""In-memory binding onto the vidprune engine for host inference stacks.

Accepts plain (frames, tokens_per_frame, dim) arrays, never touches disk, and
marshals straight into the engine: no math is reimplemented here. Results
are field-identical to the command-line ``prune`` run on the same data and
settings. Contiguous float64 input is wrapped without copying; heavy kernels
run inside numpy/BLAS, which release the interpreter lock for their duration,
so concurrent calls from multiple host threads are fine.

Configuration keywords mirror the engine's ``PruneConfig`` fields
(``retention_ratio``, ``min_ratio``, ``tau``, ``lam``, ``beta``, ``knn``,
``normalize_tokens``, ``seed``). Invalid values raise
:class:`InvalidInputError` (the CLI's exit-1 condition); unmeetable budgets
raise :class:`InfeasibleBudgetError` (exit 2).
"""

from __future__ import annotations

import numpy as np

import vidprune
from vidprune import InfeasibleBudgetError, InvalidInputError

__version__ = "0.1.0"

__all__ = [
    "InfeasibleBudgetError",
    "InvalidInputError",
    "coverage",
    "prune",
    "quality",
    "redundancy",
]


def _tokens(array) -> vidprune.VideoTokens:
    return vidprune.VideoTokens(array)


def _config(kwargs) -> vidprune.PruneConfig:
    if "retention_ratio" not in kwargs:
        raise InvalidInputError("retention_ratio is required")
    try:
        return vidprune.PruneConfig(**kwargs)
    except TypeError as exc:
        raise InvalidInputError(f"unknown configuration keyword: {exc}") from exc


def prune(array, **config) -> dict:
    """Prune an in-memory token tensor; returns kept indices and segment records.

    The result is a plain dict: ``kept`` holds one ascending index list per
    frame, ``segments`` one record per segment with the same fields the CLI
    writes (start, end, ratio, per_frame_count, marginal_value).
    """
    tokens = _tokens(array)
    result = vidprune.prune_video(tokens, _config(config))
    return {
        "kept": [[int(i) for i in idx] for idx in result.kept],
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
    }


def _selection(kept) -> vidprune.SelectionResult:
    return vidprune.SelectionResult(
        kept=[np.asarray(idx, dtype=np.int64) for idx in kept]
    )


def _prepared(array, normalize: bool) -> vidprune.VideoTokens:
    tokens = _tokens(array)
    return vidprune.normalize(tokens) if normalize else tokens


def coverage(array, kept, normalize_tokens: bool = True) -> float:
    """Mean best-similarity of every token to the kept set (per-frame index lists)."""
    return vidprune.coverage(_selection(kept), _prepared(array, normalize_tokens))


def redundancy(array, kept, normalize_tokens: bool = True) -> float:
    """Mean pairwise redundancy among kept tokens."""
    return vidprune.redundancy(_selection(kept), _prepared(array, normalize_tokens))


def quality(array, kept, beta: float = 1.0, normalize_tokens: bool = True) -> float:
    """Importance-minus-redundancy quality of the kept subset."""
    tokens = _prepared(array, normalize_tokens)
    flat = _selection(kept).flat_indices(tokens.tokens_per_frame)
    return vidprune.quality(flat, tokens, vidprune.QualityModel(beta=beta))
