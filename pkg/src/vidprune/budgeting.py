"""Stage 2: order segments by marginal value and turn the values into budgets.

A segment's marginal value (MV) blends representativeness (cosine to the mean
of the *other* still-unselected segments) with diversity (one minus cosine to
the mean of the already-selected segments). Segments are picked greedily by
MV; the value recorded at a segment's selection moment is what its budget is
derived from, so near-duplicate content selected late is penalized.

Recorded MVs are standardized (z-scores over all recorded values) and mapped
to retention ratios above a universal floor. Because z-scores are mean-zero,
the raw mapping would systematically under-spend; the above-floor mass is
therefore rescaled (with clamping at ratio 1 iterated to a fixed point) so
the total spend matches the global budget exactly, and per-frame token counts
are integerized by largest remainder.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .core import PruneConfig, cosine_sim
from .errors import InfeasibleBudgetError, InvalidInputError
from .segmentation import Segmentation

_STD_DEGENERATE = 1e-8


@dataclass(frozen=True)
class BudgetAllocation:
    """Selection order, recorded MVs, and the resulting per-segment budgets.

    ``ratios[k]`` is segment k's retention ratio after rescaling and clamping
    to [min_ratio, 1]. ``frame_counts[k]`` holds the integer token count of
    every frame in segment k; counts within a segment differ by at most one,
    and ``base_counts[k]`` is their minimum. The grand total equals
    round(retention_ratio * total_tokens) exactly.
    """

    order: list[int]
    mv: list[float]
    ratios: list[float]
    base_counts: list[int]
    frame_counts: list[np.ndarray]

    @property
    def total_kept(self) -> int:
        return int(sum(int(c.sum()) for c in self.frame_counts))


class OrderingStep(NamedTuple):
    segment: int
    mv: float
    representativeness: float
    diversity: float


def marginal_value(
    candidate: int,
    selected: Sequence[int],
    remaining: Sequence[int],
    seg_embeddings: np.ndarray,
    lam: float,
) -> float:
    """MV of ``candidate`` given the sets already selected / still remaining."""
    rep, div = _mv_terms(candidate, selected, remaining, seg_embeddings)
    return lam * rep + (1.0 - lam) * div


def _mv_terms(
    candidate: int,
    selected: Sequence[int],
    remaining: Sequence[int],
    seg_embeddings: np.ndarray,
) -> tuple[float, float]:
    selected = list(selected)
    others = [i for i in remaining if i != candidate]
    if set(selected) & set(others) or candidate in selected:
        raise InvalidInputError("selected and remaining segment sets overlap")
    g = seg_embeddings[candidate]
    # A forced pick (nothing else remaining) counts as fully representative,
    # and a first pick (nothing selected yet) as maximally novel.
    rep = 1.0 if not others else cosine_sim(g, seg_embeddings[others].mean(axis=0))
    div = 1.0 if not selected else 1.0 - cosine_sim(g, seg_embeddings[selected].mean(axis=0))
    return rep, div


def ordering_trace(seg_embeddings: np.ndarray, lam: float) -> list[OrderingStep]:
    """Greedy selection loop, returning each pick with its selection-moment MV terms.

    At every step the MV of each remaining segment is evaluated against the
    current selected/remaining split and the argmax is taken (ties go to the
    lowest segment index).
    """
    count = len(seg_embeddings)
    selected: list[int] = []
    remaining = list(range(count))
    steps: list[OrderingStep] = []
    while remaining:
        best_idx = None
        best = (-np.inf, -np.inf, -np.inf)
        for cand in remaining:
            rep, div = _mv_terms(cand, selected, remaining, seg_embeddings)
            value = lam * rep + (1.0 - lam) * div
            if best_idx is None or value > best[0]:
                best_idx = cand
                best = (value, rep, div)
        steps.append(OrderingStep(best_idx, best[0], best[1], best[2]))
        selected.append(best_idx)
        remaining.remove(best_idx)
    return steps


def order_segments(segmentation: Segmentation, lam: float) -> tuple[list[int], list[float]]:
    """Selection order plus each segment's MV recorded at its selection moment.

    The returned MV list is indexed by segment (not by selection position).
    """
    steps = ordering_trace(segmentation.embeddings, lam)
    mv = [0.0] * len(segmentation)
    for step in steps:
        mv[step.segment] = step.mv
    return [step.segment for step in steps], mv


def _rescaled_ratios(
    mv: np.ndarray, lengths: np.ndarray, ratio: float, min_ratio: float
) -> np.ndarray:
    """Ratios in [min_ratio, 1] with frame-weighted mean exactly ``ratio``.

    Z-scores of the recorded MVs set the relative shares of the discretionary
    budget; shares are clamped below at the floor and above at full retention,
    with the remaining mass redistributed among unclamped segments until the
    clamp set stabilizes.
    """
    total_frames = float(lengths.sum())
    std = float(mv.std())
    if std < _STD_DEGENERATE:
        return np.full(len(mv), ratio)
    z = (mv - mv.mean()) / std
    headroom = 1.0 - min_ratio
    weights = np.maximum((ratio - min_ratio) * z, 0.0)
    need = (ratio - min_ratio) * total_frames
    extra = np.zeros(len(mv))
    pinned = np.zeros(len(mv), dtype=bool)
    for _ in range(len(mv) + 1):
        open_ = ~pinned
        if not open_.any():
            break
        free = need - headroom * float(lengths[pinned].sum())
        mass = float((lengths[open_] * weights[open_]).sum())
        if mass <= 0.0:
            extra[open_] = free / float(lengths[open_].sum())
        else:
            extra[open_] = weights[open_] * (free / mass)
        over = open_ & (extra > headroom)
        if not over.any():
            break
        pinned |= over
        extra[over] = headroom
    return min_ratio + np.clip(extra, 0.0, headroom)


def _integer_counts(
    quotas: np.ndarray, lengths: np.ndarray, tokens_per_frame: int, target: int
) -> list[np.ndarray]:
    """Per-frame integer counts hitting ``target`` exactly via largest remainder.

    Every frame of segment k starts at floor(quotas[k]) clamped into [1, M];
    single-token adjustments then go to the frames whose real quota is most
    under-served (for increments) or most over-served (for decrements), ties
    resolved toward the earlier segment and frame.
    """
    seg_of_frame = np.repeat(np.arange(len(lengths)), lengths)
    q = quotas[seg_of_frame]
    counts = np.clip(np.floor(q).astype(np.int64), 1, tokens_per_frame)
    deficit = target - int(counts.sum())
    while deficit > 0:
        priority = np.where(counts < tokens_per_frame, q - counts, -np.inf)
        counts[int(np.argmax(priority))] += 1
        deficit -= 1
    while deficit < 0:
        priority = np.where(counts > 1, counts - q, -np.inf)
        counts[int(np.argmax(priority))] -= 1
        deficit += 1
    bounds = np.concatenate([[0], np.cumsum(lengths)])
    return [counts[bounds[k]:bounds[k + 1]].copy() for k in range(len(lengths))]


def allocate(
    mv: Sequence[float],
    segmentation: Segmentation,
    config: PruneConfig,
    tokens_per_frame: int,
    total_tokens: int,
    order: Sequence[int] | None = None,
) -> BudgetAllocation:
    """Convert recorded MVs into per-segment ratios and exact integer counts.

    Raises :class:`InfeasibleBudgetError` when the rounded global budget
    cannot give every frame at least one token (or exceeds the token count).
    """
    lengths = segmentation.lengths
    if len(mv) != len(lengths):
        raise InvalidInputError(f"expected {len(lengths)} marginal values, got {len(mv)}")
    frames = int(lengths.sum())
    if frames * tokens_per_frame != total_tokens:
        raise InvalidInputError("total_tokens does not match frames * tokens_per_frame")
    target = round(config.retention_ratio * total_tokens)
    if target < frames:
        raise InfeasibleBudgetError(
            f"budget round({config.retention_ratio} * {total_tokens}) = {target} cannot give "
            f"every one of {frames} frames at least one token"
        )
    if target > total_tokens:
        raise InfeasibleBudgetError(f"budget {target} exceeds the {total_tokens} tokens available")

    mv_arr = np.asarray(mv, dtype=np.float64)
    ratios = _rescaled_ratios(mv_arr, lengths, config.retention_ratio, config.min_ratio)
    frame_counts = _integer_counts(ratios * tokens_per_frame, lengths, tokens_per_frame, target)
    return BudgetAllocation(
        order=list(order) if order is not None else list(range(len(lengths))),
        mv=[float(v) for v in mv_arr],
        ratios=[float(r) for r in ratios],
        base_counts=[int(c.min()) for c in frame_counts],
        frame_counts=frame_counts,
    )
