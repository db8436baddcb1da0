"""Token tensors, pruning configuration, and the embedding/similarity primitives.

Everything downstream (segmentation, budgeting, token selection) is built on
three operations defined here: per-token L2 normalization, frame embeddings by
average pooling, and cosine similarity with an explicit zero-vector convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class VideoTokens:
    """Dense visual-token tensor for one sampled video.

    ``data`` has shape (frames, tokens_per_frame, dim), frame-major, and is
    held in float64 (inputs arrive as 32-bit floats on disk; all in-memory
    arithmetic runs at or above 32-bit precision). Every frame carries the
    same number of tokens and all values must be finite.
    """

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(np.asarray(self.data, dtype=np.float64))
        if arr.ndim != 3:
            raise InvalidInputError(
                f"token tensor must have shape (frames, tokens_per_frame, dim), got {arr.shape}"
            )
        if min(arr.shape) < 1:
            raise InvalidInputError(f"token tensor has an empty axis: {arr.shape}")
        if not np.isfinite(arr).all():
            raise InvalidInputError("token tensor contains NaN or Inf values")
        object.__setattr__(self, "data", arr)

    @property
    def frames(self) -> int:
        return self.data.shape[0]

    @property
    def tokens_per_frame(self) -> int:
        return self.data.shape[1]

    @property
    def dim(self) -> int:
        return self.data.shape[2]

    @property
    def total_tokens(self) -> int:
        """Token count across all frames (frames * tokens_per_frame)."""
        return self.data.shape[0] * self.data.shape[1]

    def flat(self) -> np.ndarray:
        """View of the tensor as a (total_tokens, dim) matrix, frame-major."""
        return self.data.reshape(-1, self.data.shape[2])

    @classmethod
    def _wrap(cls, data: np.ndarray) -> "VideoTokens":
        # Internal constructor for arrays derived from validated tensors;
        # skips the finiteness/layout checks.
        obj = object.__new__(cls)
        object.__setattr__(obj, "data", data)
        return obj


@dataclass(frozen=True)
class PruneConfig:
    """All knobs of the pruning pipeline.

    ``retention_ratio`` is the global fraction of tokens kept. ``min_ratio``
    floors every segment's share (defaults to half the global ratio).
    ``tau`` is the adjacent-frame similarity threshold for segmentation,
    ``lam`` balances representativeness against diversity when ordering
    segments, ``knn`` sizes the density neighborhoods, and ``beta`` weights
    the redundancy penalty of the evaluation-side quality objective.
    """

    retention_ratio: float
    min_ratio: float | None = None
    tau: float = 0.95
    lam: float = 0.5
    beta: float = 1.0
    knn: int = 5
    normalize_tokens: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        r = float(self.retention_ratio)
        if not (0.0 < r <= 1.0):
            raise InvalidInputError(f"retention_ratio must lie in (0, 1], got {r}")
        object.__setattr__(self, "retention_ratio", r)
        m = self.min_ratio
        m = r / 2.0 if m is None else float(m)
        if not (0.0 < m <= r):
            raise InvalidInputError(
                f"min_ratio must lie in (0, retention_ratio], got {m} with retention_ratio {r}"
            )
        object.__setattr__(self, "min_ratio", m)
        if not (-1.0 < self.tau <= 1.0):
            raise InvalidInputError(f"tau must lie in (-1, 1], got {self.tau}")
        if not (0.0 <= self.lam <= 1.0):
            raise InvalidInputError(f"lam must lie in [0, 1], got {self.lam}")
        if self.beta < 0.0:
            raise InvalidInputError(f"beta must be >= 0, got {self.beta}")
        if int(self.knn) < 1:
            raise InvalidInputError(f"knn must be >= 1, got {self.knn}")
        object.__setattr__(self, "knn", int(self.knn))
        if not (0 <= int(self.seed) < 2**64):
            raise InvalidInputError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def extra_ratio(self) -> float:
        """Discretionary budget above the per-segment floor."""
        return self.retention_ratio - self.min_ratio


@dataclass(frozen=True)
class SegmentBudget:
    """Per-segment record of the budget a selection was produced under."""

    start: int
    end: int
    ratio: float
    per_frame_count: int
    marginal_value: float

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class SelectionResult:
    """Kept token indices per frame plus the segment/budget metadata behind them.

    ``kept[f]`` is a strictly increasing array of token indices retained in
    frame ``f``. Within a segment every frame keeps ``per_frame_count`` or
    ``per_frame_count + 1`` tokens; the odd token out is how the global
    budget is met exactly despite per-segment rounding.
    """

    kept: list[np.ndarray]
    segments: list[SegmentBudget] = field(default_factory=list)

    @property
    def total_kept(self) -> int:
        return sum(len(idx) for idx in self.kept)

    def flat_indices(self, tokens_per_frame: int) -> np.ndarray:
        """Kept indices mapped into the flattened (frame-major) token numbering."""
        parts = [
            np.asarray(idx, dtype=np.int64) + f * tokens_per_frame
            for f, idx in enumerate(self.kept)
        ]
        if not parts:
            return np.empty(0, dtype=np.int64)
        return np.concatenate(parts)


def normalize(tokens: VideoTokens) -> VideoTokens:
    """Scale every token vector to unit L2 norm; zero vectors pass through unchanged."""
    data = tokens.data
    norms = np.sqrt(np.einsum("fmd,fmd->fm", data, data))[..., None]
    safe = np.where(norms > 0.0, norms, 1.0)
    return VideoTokens._wrap(data / safe)


def frame_embedding(tokens: VideoTokens, frame: int) -> np.ndarray:
    """Arithmetic mean of one frame's token vectors (average pooling)."""
    if not (0 <= frame < tokens.frames):
        raise InvalidInputError(f"frame {frame} out of range [0, {tokens.frames})")
    return tokens.data[frame].mean(axis=0)


def frame_embeddings(tokens: VideoTokens) -> np.ndarray:
    """All frame embeddings at once, shape (frames, dim)."""
    return tokens.data.mean(axis=1)


def cosine_sim(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity, defined as 0 when either vector has zero norm.

    The zero convention makes degenerate all-zero frames maximally dissimilar
    (short of -1) instead of raising, so they split segments rather than crash.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(a @ b / (na * nb))
