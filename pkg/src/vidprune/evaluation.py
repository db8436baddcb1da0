"""Measurable quality objective, brute-force oracle, diagnostics, and synthetic videos.

The selection pipeline never optimizes this objective directly; it exists so
selections can be scored and compared against exhaustively-optimal subsets on
tiny instances. Importance and redundancy are instantiated from cosine
geometry (both shifted into [0, 1]): importance of a token is its similarity
to the global mean token, redundancy of a pair is their mutual similarity.
The pairwise redundancy penalty counts each unordered pair once.

The synthetic generator plants known structure: segments around mutually
orthogonal cluster centers, optional per-frame novel-token injections with
recorded positions, and an optional shared background cluster, all
deterministic in the seed (and emitted at float32 precision so in-memory
tensors match their on-disk form bit for bit).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

from .budgeting import allocate, ordering_trace
from .core import PruneConfig, SelectionResult, VideoTokens
from .errors import InvalidInputError
from .segmentation import segment_video

_ORACLE_LIMIT = 16


@dataclass(frozen=True)
class QualityModel:
    """Cosine-geometry instantiation of the subset quality objective."""

    beta: float = 1.0

    def importance(self, flat_tokens: np.ndarray) -> np.ndarray:
        """Per-token importance: similarity to the mean token, shifted to [0, 1]."""
        mean = flat_tokens.mean(axis=0)
        return (1.0 + _cosine_to(flat_tokens, mean)) / 2.0

    def redundancy_matrix(self, flat_tokens: np.ndarray) -> np.ndarray:
        """Pairwise redundancy: cosine similarity shifted to [0, 1], symmetric."""
        return (1.0 + _unit_rows(flat_tokens) @ _unit_rows(flat_tokens).T) / 2.0


def _unit_rows(x: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    return x / np.where(norms > 0.0, norms, 1.0)


def _cosine_to(x: np.ndarray, v: np.ndarray) -> np.ndarray:
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return np.zeros(len(x))
    norms = np.linalg.norm(x, axis=1)
    out = x @ v / (np.where(norms > 0.0, norms, 1.0) * nv)
    out[norms == 0.0] = 0.0
    return out


def _as_flat(tokens: VideoTokens | np.ndarray) -> np.ndarray:
    if isinstance(tokens, VideoTokens):
        return tokens.flat()
    arr = np.asarray(tokens, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidInputError(f"expected a (tokens, dim) matrix, got shape {arr.shape}")
    return arr


def _kept_flat(kept, tokens: VideoTokens | np.ndarray) -> np.ndarray:
    """Flattened kept-token indices from a SelectionResult or per-frame lists."""
    if isinstance(kept, SelectionResult):
        if not isinstance(tokens, VideoTokens):
            raise InvalidInputError("a SelectionResult needs VideoTokens to resolve indices")
        return kept.flat_indices(tokens.tokens_per_frame)
    first = kept[0] if len(kept) else None
    if first is not None and np.ndim(first) > 0 and isinstance(tokens, VideoTokens):
        per_frame = [np.asarray(ix, dtype=np.int64) for ix in kept]
        return SelectionResult(kept=per_frame).flat_indices(tokens.tokens_per_frame)
    return np.asarray(kept, dtype=np.int64)


def quality(
    subset: Sequence[int],
    all_tokens: VideoTokens | np.ndarray,
    model: QualityModel,
) -> float:
    """Total importance of the subset minus beta times its pairwise redundancy."""
    flat = _as_flat(all_tokens)
    idx = np.asarray(list(subset), dtype=np.int64)
    if idx.size == 0:
        return 0.0
    if len(np.unique(idx)) != len(idx):
        raise InvalidInputError("subset contains duplicate token indices")
    if idx.min() < 0 or idx.max() >= len(flat):
        raise InvalidInputError(f"subset index out of range [0, {len(flat)})")
    total = float(model.importance(flat)[idx].sum())
    if len(idx) > 1:
        sub = model.redundancy_matrix(flat[idx])
        total -= model.beta * float(sub[np.triu_indices(len(idx), k=1)].sum())
    return total


def oracle_best_subset(
    tokens: VideoTokens | np.ndarray,
    budget: int,
    model: QualityModel,
) -> tuple[tuple[int, ...], float]:
    """Exhaustively optimal subset of the given size (ties: lexicographically first).

    Only instances of at most 16 tokens are accepted; the search enumerates
    every subset of the requested size.
    """
    flat = _as_flat(tokens)
    n = len(flat)
    if n > _ORACLE_LIMIT:
        raise InvalidInputError(f"exhaustive search is capped at {_ORACLE_LIMIT} tokens, got {n}")
    if not (1 <= budget <= n):
        raise InvalidInputError(f"budget {budget} out of range [1, {n}]")
    imp = model.importance(flat)
    red = model.redundancy_matrix(flat)
    best: tuple[int, ...] | None = None
    best_q = -np.inf
    for combo in itertools.combinations(range(n), budget):
        ix = np.asarray(combo)
        q = float(imp[ix].sum())
        if budget > 1:
            sub = red[np.ix_(ix, ix)]
            q -= model.beta * float(sub[np.triu_indices(budget, k=1)].sum())
        if q > best_q:
            best_q = q
            best = combo
    return best, best_q


def coverage(kept, tokens: VideoTokens | np.ndarray) -> float:
    """Mean over all tokens of the best cosine similarity to any kept token."""
    flat = _as_flat(tokens)
    idx = _kept_flat(kept, tokens)
    if idx.size == 0:
        raise InvalidInputError("selection keeps no tokens")
    units = _unit_rows(flat)
    sims = units @ units[idx].T
    return float(sims.max(axis=1).mean())


def redundancy(kept, tokens: VideoTokens | np.ndarray) -> float:
    """Mean pairwise redundancy among kept tokens (needs at least two)."""
    flat = _as_flat(tokens)
    idx = _kept_flat(kept, tokens)
    if idx.size < 2:
        raise InvalidInputError("redundancy needs at least 2 kept tokens")
    model = QualityModel()
    sub = model.redundancy_matrix(flat[idx])
    return float(sub[np.triu_indices(len(idx), k=1)].mean())


@dataclass(frozen=True)
class SegmentSpec:
    """One planted segment: frame count, cluster count, and motion kind."""

    length: int
    n_clusters: int = 1
    motion: str = "static"


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a synthetic video with known boundaries and novelties."""

    segments: list[SegmentSpec]
    tokens_per_frame: int
    dim: int
    background_fraction: float = 0.0
    noise_scale: float = 0.02
    novel_per_frame: int = 3
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.segments:
            raise InvalidInputError("synthetic spec needs at least one segment")
        segs = [s if isinstance(s, SegmentSpec) else SegmentSpec(**s) for s in self.segments]
        object.__setattr__(self, "segments", segs)
        for s in segs:
            if s.length < 2:
                raise InvalidInputError(f"segment lengths must be >= 2, got {s.length}")
            if s.n_clusters < 1:
                raise InvalidInputError(f"n_clusters must be >= 1, got {s.n_clusters}")
            if s.motion not in ("static", "dynamic"):
                raise InvalidInputError(f"motion must be 'static' or 'dynamic', got {s.motion!r}")
        if not (0.0 <= self.background_fraction <= 1.0):
            raise InvalidInputError("background_fraction must lie in [0, 1]")
        if self.noise_scale < 0.0:
            raise InvalidInputError("noise_scale must be >= 0")
        if self.novel_per_frame < 1:
            raise InvalidInputError("novel_per_frame must be >= 1")

    @property
    def frames(self) -> int:
        return sum(s.length for s in self.segments)

    def to_dict(self) -> dict:
        return {
            "segments": [
                {"length": s.length, "n_clusters": s.n_clusters, "motion": s.motion}
                for s in self.segments
            ],
            "tokens_per_frame": self.tokens_per_frame,
            "dim": self.dim,
            "background_fraction": self.background_fraction,
            "noise_scale": self.noise_scale,
            "novel_per_frame": self.novel_per_frame,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "SyntheticSpec":
        try:
            return cls(**payload)
        except TypeError as exc:
            raise InvalidInputError(f"bad synthetic spec: {exc}") from exc


def generate_synthetic(
    spec: SyntheticSpec,
) -> tuple[VideoTokens, list[int], list[tuple[int, int]]]:
    """Deterministic synthetic video with its ground truth.

    Returns the token tensor, the true boundary frames (segment ends), and
    the positions of injected novel tokens as (frame, token_index) pairs.
    Cluster centers are mutually orthogonal unit directions, shared-background
    positions lead every frame, dynamic segments replace a few non-background
    tokens per frame (from the second frame of the segment on) with fresh
    orthogonal directions, and every token gets isotropic noise.
    """
    m, d = spec.tokens_per_frame, spec.dim
    bg_count = int(np.floor(spec.background_fraction * m))
    rng = np.random.default_rng(spec.seed)

    n_novel_dirs = sum(
        (s.length - 1) * spec.novel_per_frame for s in spec.segments if s.motion == "dynamic"
    )
    n_dirs = sum(s.n_clusters for s in spec.segments) + (1 if bg_count else 0) + n_novel_dirs
    if n_dirs > d:
        raise InvalidInputError(
            f"spec needs {n_dirs} orthogonal directions but dim is only {d}"
        )
    for s in spec.segments:
        if s.n_clusters > m - bg_count:
            raise InvalidInputError(
                f"segment wants {s.n_clusters} clusters but only {m - bg_count} "
                "non-background token positions exist"
            )
    if any(s.motion == "dynamic" for s in spec.segments) and spec.novel_per_frame > m - bg_count:
        raise InvalidInputError("novel_per_frame exceeds the non-background positions")

    basis = np.linalg.qr(rng.standard_normal((d, n_dirs)))[0].T
    cursor = 0

    def take(count: int) -> np.ndarray:
        nonlocal cursor
        out = basis[cursor:cursor + count]
        cursor += count
        return out

    bg_dir = take(1)[0] if bg_count else None
    data = np.empty((spec.frames, m, d))
    novel: list[tuple[int, int]] = []
    frame0 = 0
    for s in spec.segments:
        centers = take(s.n_clusters)
        base = np.empty((m, d))
        if bg_count:
            base[:bg_count] = bg_dir
        base[bg_count:] = centers[(np.arange(m - bg_count)) % s.n_clusters]
        for j in range(s.length):
            frame = base + spec.noise_scale * rng.standard_normal((m, d))
            if s.motion == "dynamic" and j > 0:
                spots = np.sort(
                    rng.choice(np.arange(bg_count, m), size=spec.novel_per_frame, replace=False)
                )
                dirs = take(spec.novel_per_frame)
                frame[spots] = dirs + spec.noise_scale * rng.standard_normal((len(spots), d))
                novel.extend((frame0 + j, int(p)) for p in spots)
            data[frame0 + j] = frame
        frame0 += s.length

    boundaries = list(np.cumsum([s.length for s in spec.segments])[:-1] - 1)
    tokens = VideoTokens(data.astype(np.float32).astype(np.float64))
    return tokens, [int(b) for b in boundaries], novel


class SweepEntry(NamedTuple):
    """Recorded ordering and budgets for one balance setting."""

    lam: float
    order: list[int]
    mv: list[float]
    representativeness: list[float]
    diversity: list[float]
    ratios: list[float]
    base_counts: list[int]


def sweep_lambda(
    tokens: VideoTokens,
    config: PruneConfig,
    lambdas: Sequence[float] = (0.0, 0.2, 0.4, 0.5, 0.6, 0.8, 1.0),
) -> list[SweepEntry]:
    """Re-run the ordering and budgeting stages across a sweep of balance values.

    Segmentation is computed once; every entry reports, per segment index,
    the MV and its two components recorded at that segment's selection
    moment, along with the resulting ratios and base counts.
    """
    seg = segment_video(tokens, config)
    entries = []
    for lam in lambdas:
        steps = ordering_trace(seg.embeddings, float(lam))
        by_seg = sorted(steps, key=lambda st: st.segment)
        mv = [st.mv for st in by_seg]
        alloc = allocate(
            mv, seg, replace(config, lam=float(lam)),
            tokens.tokens_per_frame, tokens.total_tokens,
            order=[st.segment for st in steps],
        )
        entries.append(SweepEntry(
            lam=float(lam),
            order=[st.segment for st in steps],
            mv=mv,
            representativeness=[st.representativeness for st in by_seg],
            diversity=[st.diversity for st in by_seg],
            ratios=alloc.ratios,
            base_counts=alloc.base_counts,
        ))
    return entries
