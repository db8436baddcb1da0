"""Stage 3: density-peak token selection within each segment.

The anchor (first) frame of a segment is pruned with DPC-KNN: a token's local
density is exp(-mean squared distance to its k nearest neighbors in the
frame) and its separation is the squared distance to the closest token of
strictly higher density (the densest token instead takes the frame's largest
distance). Later frames swap density for temporal novelty: distance to the k
nearest *previously selected* tokens (the guide set), so tokens echoing the
past score near zero while genuinely new content scores high. Separation
stays intra-frame. Each frame's picks are appended to the guide set before
the next frame is scored.

Density orderings use the strict total order (density desc, index asc), so
exact duplicates never both take the max-distance branch: the later copy
gets separation 0 and is pruned, which is the point of the exercise.

All distance math accumulates in float64. Large frame-versus-guide products
are routed through a float32 prefilter with certified float64 refinement:
candidate neighbors are picked in float32 with a safety margin, re-measured
exactly in float64, and any row whose certificate fails falls back to the
plain float64 path, so results are identical to the direct computation.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import VideoTokens
from .errors import InvalidInputError

# Cross products below this many multiply-adds skip the float32 prefilter.
_PREFILTER_MIN_WORK = 1 << 24
_PREFILTER_MARGIN = 8
# Generous bound on float32 distance error relative to the distance scale.
_PREFILTER_TOL = 1e-3


@dataclass(frozen=True)
class TokenScores:
    """Per-token density (rho), separation (delta), and their product (gamma)."""

    rho: np.ndarray
    delta: np.ndarray
    gamma: np.ndarray


class GuideSet:
    """Tokens selected so far within a segment, with their frame of origin.

    Keeps a float32 mirror and cached squared norms alongside the float64
    rows so repeated distance queries stay cheap as the set grows.
    """

    def __init__(self, dim: int, capacity: int = 64):
        self._dim = dim
        self._n = 0
        self._rows = np.empty((max(capacity, 1), dim), dtype=np.float64)
        self._rows32 = np.empty((max(capacity, 1), dim), dtype=np.float32)
        self._sq = np.empty(max(capacity, 1), dtype=np.float64)
        self._sq32 = np.empty(max(capacity, 1), dtype=np.float32)
        self.origins: list[tuple[int, int]] = []

    @classmethod
    def from_tokens(cls, vectors: np.ndarray, frame: int = 0) -> "GuideSet":
        vectors = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
        guide = cls(vectors.shape[1], capacity=len(vectors))
        guide.append(vectors, frame, range(len(vectors)))
        return guide

    def __len__(self) -> int:
        return self._n

    @property
    def size(self) -> int:
        return self._n

    @property
    def vectors(self) -> np.ndarray:
        return self._rows[: self._n]

    @property
    def vectors32(self) -> np.ndarray:
        return self._rows32[: self._n]

    @property
    def sq_norms(self) -> np.ndarray:
        return self._sq[: self._n]

    @property
    def sq_norms32(self) -> np.ndarray:
        return self._sq32[: self._n]

    def append(self, vectors: np.ndarray, frame: int, token_indices: Sequence[int]) -> None:
        vectors = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
        if vectors.shape[1] != self._dim:
            raise InvalidInputError(
                f"guide expects dim {self._dim}, got vectors of dim {vectors.shape[1]}"
            )
        n_new = len(vectors)
        if self._n + n_new > len(self._rows):
            grow = max(len(self._rows) * 2, self._n + n_new)
            self._rows = np.vstack([self._rows[: self._n], np.empty((grow - self._n, self._dim))])
            self._rows32 = np.vstack(
                [self._rows32[: self._n], np.empty((grow - self._n, self._dim), dtype=np.float32)]
            )
            self._sq = np.concatenate([self._sq[: self._n], np.empty(grow - self._n)])
            self._sq32 = np.concatenate(
                [self._sq32[: self._n], np.empty(grow - self._n, dtype=np.float32)]
            )
        sl = slice(self._n, self._n + n_new)
        self._rows[sl] = vectors
        self._rows32[sl] = vectors
        self._sq[sl] = np.einsum("ij,ij->i", vectors, vectors)
        self._sq32[sl] = np.einsum(
            "ij,ij->i", self._rows32[sl], self._rows32[sl], dtype=np.float32
        )
        self.origins.extend((frame, int(i)) for i in token_indices)
        self._n += n_new


def _sq_dists(x: np.ndarray, y: np.ndarray, y_sq: np.ndarray | None = None) -> np.ndarray:
    """Pairwise squared Euclidean distances via the norm identity, clipped at 0."""
    x_sq = np.einsum("ij,ij->i", x, x)
    if y_sq is None:
        y_sq = np.einsum("ij,ij->i", y, y)
    d = x @ y.T
    d *= -2.0
    d += x_sq[:, None]
    d += y_sq[None, :]
    np.maximum(d, 0.0, out=d)
    return d


def _smallest_sums(d: np.ndarray, k: int) -> np.ndarray:
    """Row-wise sum of the k smallest entries."""
    if k >= d.shape[1]:
        return d.sum(axis=1)
    return np.partition(d, k - 1, axis=1)[:, :k].sum(axis=1)


_workspace = threading.local()


def _scratch(shape: tuple, dtype) -> np.ndarray:
    """Reusable per-thread buffer (refinement shapes recur frame after frame)."""
    buffers = getattr(_workspace, "buffers", None)
    if buffers is None:
        buffers = _workspace.buffers = {}
    key = (shape, np.dtype(dtype).str)
    buf = buffers.get(key)
    if buf is None:
        buf = buffers[key] = np.empty(shape, dtype=dtype)
    return buf


def _knn_sq_sums(x: np.ndarray, guide: GuideSet, k: int) -> np.ndarray:
    """Sum of squared distances from each row of x to its k nearest guide rows.

    Exact in float64; the float32 prefilter only narrows the candidate set
    and certifies per row that the true k nearest survived the narrowing.
    """
    g = guide.vectors
    n = len(g)
    m, dim = x.shape
    if n <= k + _PREFILTER_MARGIN or m * n * dim < _PREFILTER_MIN_WORK:
        return _smallest_sums(_sq_dists(x, g, guide.sq_norms), k)

    x32 = x.astype(np.float32)
    x2_32 = np.einsum("ij,ij->i", x32, x32)
    d32 = x32 @ guide.vectors32.T
    d32 *= np.float32(-2.0)
    d32 += x2_32[:, None]
    d32 += guide.sq_norms32[None, :]
    if not np.isfinite(d32).all():
        return _smallest_sums(_sq_dists(x, g, guide.sq_norms), k)

    kk = k + _PREFILTER_MARGIN
    cand = np.argpartition(d32, kk - 1, axis=1)[:, :kk]
    cand32_max = np.take_along_axis(d32, cand, axis=1).max(axis=1)

    x_sq = np.einsum("ij,ij->i", x, x)
    rows = _scratch((m * kk, dim), np.float64)
    np.take(g, cand.ravel(), axis=0, out=rows)
    prod = _scratch((m, kk, 1), np.float64)
    np.matmul(rows.reshape(m, kk, dim), x[:, :, None], out=prod)
    exact = guide.sq_norms[cand] - 2.0 * prod[:, :, 0]
    exact += x_sq[:, None]
    np.maximum(exact, 0.0, out=exact)
    exact.sort(axis=1)
    sums = exact[:, :k].sum(axis=1)

    # Rows where the k-th exact distance approaches the float32 cut cannot be
    # certified; recompute those rows directly.
    tol = _PREFILTER_TOL * np.maximum(1.0, x_sq + float(guide.sq_norms.max()))
    bad = exact[:, k - 1] > cand32_max - tol
    if bad.any():
        sums[bad] = _smallest_sums(_sq_dists(x[bad], g, guide.sq_norms), k)
    return sums


def _separation(dists: np.ndarray, density: np.ndarray) -> np.ndarray:
    """Squared distance to the nearest strictly-denser token, per the strict
    (density desc, index asc) order; the top-ranked token takes its row max."""
    m = len(density)
    order = np.lexsort((np.arange(m), -density))
    permuted = dists[np.ix_(order, order)]
    delta = np.empty(m)
    delta[order[0]] = permuted[0].max()
    if m > 1:
        cummin = np.minimum.accumulate(permuted[1:, :-1], axis=1)
        delta[order[1:]] = cummin[np.arange(m - 1), np.arange(m - 1)]
    return delta


def dpc_knn_scores(frame_tokens: np.ndarray, k: int) -> TokenScores:
    """Standard density-peak scores for one frame's tokens (needs >= 2 tokens)."""
    x = np.asarray(frame_tokens, dtype=np.float64)
    m = x.shape[0]
    if m < 2:
        raise InvalidInputError("density-peak scoring needs at least 2 tokens per frame")
    k_eff = min(int(k), m - 1)
    dists = _sq_dists(x, x)
    np.fill_diagonal(dists, 0.0)
    knn_view = dists.copy()
    np.fill_diagonal(knn_view, np.inf)
    rho = np.exp(-_smallest_sums(knn_view, k_eff) / k_eff)
    delta = _separation(dists, rho)
    return TokenScores(rho=rho, delta=delta, gamma=rho * delta)


def tg_dpc_scores(frame_tokens: np.ndarray, guide: GuideSet, k: int) -> TokenScores:
    """Temporal-guided scores: novelty against the guide set, separation in-frame."""
    x = np.asarray(frame_tokens, dtype=np.float64)
    m = x.shape[0]
    if len(guide) == 0:
        raise InvalidInputError("guide set is empty; prune the anchor frame first")
    if m < 2:
        raise InvalidInputError("density-peak scoring needs at least 2 tokens per frame")
    k_eff = min(int(k), len(guide))
    rho = 1.0 - np.exp(-_knn_sq_sums(x, guide, k_eff) / k_eff)
    dists = _sq_dists(x, x)
    np.fill_diagonal(dists, 0.0)
    delta = _separation(dists, rho)
    return TokenScores(rho=rho, delta=delta, gamma=rho * delta)


def prune_frame(
    frame_tokens: np.ndarray,
    budget: int,
    guide: GuideSet | None,
    k: int,
) -> np.ndarray:
    """Indices of the ``budget`` highest-gamma tokens, ascending.

    Scored with DPC-KNN when ``guide`` is None (anchor frame), otherwise with
    the temporal-guided variant. Gamma ties go to the lower token index.
    Keeping every token (or a single-token frame) short-circuits the scoring.
    """
    x = np.asarray(frame_tokens, dtype=np.float64)
    m = x.shape[0]
    if not (1 <= budget <= m):
        raise InvalidInputError(f"budget {budget} out of range [1, {m}]")
    if budget == m:
        return np.arange(m, dtype=np.int64)
    scores = dpc_knn_scores(x, k) if guide is None else tg_dpc_scores(x, guide, k)
    top = np.lexsort((np.arange(m), -scores.gamma))[:budget]
    return np.sort(top).astype(np.int64)


def prune_segment(
    tokens: VideoTokens,
    segment: tuple[int, int],
    budget: int | Sequence[int],
    k: int,
) -> list[np.ndarray]:
    """Per-frame kept indices for one segment.

    The first frame seeds the guide set via DPC-KNN; every later frame is
    scored against the guide accumulated so far and its picks are appended
    afterwards. ``budget`` may be one count for all frames or one per frame.
    """
    start, end = segment
    if not (0 <= start < end <= tokens.frames):
        raise InvalidInputError(f"segment {segment} out of range [0, {tokens.frames})")
    length = end - start
    m = tokens.tokens_per_frame
    try:
        counts = np.broadcast_to(np.asarray(budget, dtype=np.int64), (length,))
    except ValueError as exc:
        raise InvalidInputError(
            f"budget must be a scalar or one count per frame ({length}), got {budget!r}"
        ) from exc
    if counts.min() < 1 or counts.max() > m:
        raise InvalidInputError(f"per-frame budgets must lie in [1, {m}]")

    guide = GuideSet(tokens.dim, capacity=int(counts.sum()))
    kept: list[np.ndarray] = []
    for j in range(length):
        frame = tokens.data[start + j]
        picks = prune_frame(frame, int(counts[j]), guide if j > 0 else None, k)
        kept.append(picks)
        guide.append(frame[picks], start + j, picks)
    return kept
