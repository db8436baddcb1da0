"""Stage 1: split the frame sequence into coherent segments.

A boundary is declared after every frame whose embedding's cosine similarity
to the next frame falls below the threshold ``tau``. Single-frame fragments
are then merged into their most similar neighbor so that (for videos with at
least two frames) every segment spans at least two frames.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PruneConfig, VideoTokens, cosine_sim, frame_embeddings, normalize
from .errors import InvalidInputError


@dataclass(frozen=True)
class Segmentation:
    """Ordered contiguous segments covering [0, frames) plus their mean embeddings.

    ``segments[k]`` is a half-open frame range (start, end); ``embeddings[k]``
    is the mean of all token vectors of all frames in that range.
    """

    segments: list[tuple[int, int]]
    embeddings: np.ndarray

    def __len__(self) -> int:
        return len(self.segments)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([e - s for s, e in self.segments], dtype=np.int64)


def adjacent_similarities(tokens: VideoTokens) -> np.ndarray:
    """Cosine similarity between each frame embedding and the next, length frames-1."""
    emb = frame_embeddings(tokens)
    sims = np.empty(max(tokens.frames - 1, 0))
    for t in range(tokens.frames - 1):
        sims[t] = cosine_sim(emb[t], emb[t + 1])
    return sims


def find_boundaries(tokens: VideoTokens, tau: float) -> list[int]:
    """Frames t where similarity to frame t+1 drops below tau (segment ends after t)."""
    sims = adjacent_similarities(tokens)
    return [int(t) for t in np.nonzero(sims < tau)[0]]


def segments_from_boundaries(boundaries: list[int], frames: int) -> list[tuple[int, int]]:
    """Cut [0, frames) after each boundary frame."""
    starts = [0] + [b + 1 for b in boundaries]
    ends = [b + 1 for b in boundaries] + [frames]
    return list(zip(starts, ends))


def segment_embedding(tokens: VideoTokens, start: int, end: int) -> np.ndarray:
    """Mean of all token vectors of all frames in [start, end)."""
    return tokens.data[start:end].reshape(-1, tokens.dim).mean(axis=0)


def _check_partition(segments: list[tuple[int, int]], frames: int) -> None:
    if not segments:
        raise InvalidInputError("segment list is empty")
    cursor = 0
    for s, e in segments:
        if s != cursor or e <= s:
            raise InvalidInputError(f"segments do not partition [0, {frames}): {segments}")
        cursor = e
    if cursor != frames:
        raise InvalidInputError(f"segments do not partition [0, {frames}): {segments}")


def merge_singletons(segments: list[tuple[int, int]], tokens: VideoTokens) -> Segmentation:
    """Absorb every single-frame segment into its most similar neighbor.

    The scan runs left to right and restarts after each merge. A singleton is
    compared against the current mean embeddings of its adjacent segments via
    the cosine between its frame embedding and each neighbor's segment
    embedding; ties merge left (favoring the temporally earlier segment).
    Stops when no singleton remains or only one segment is left.
    """
    _check_partition(segments, tokens.frames)
    segs = list(segments)
    embeds = [segment_embedding(tokens, s, e) for s, e in segs]

    def merge(k: int, into: int) -> None:
        lo, hi = (into, k) if into < k else (k, into)
        merged = (segs[lo][0], segs[hi][1])
        segs[lo:hi + 1] = [merged]
        embeds[lo:hi + 1] = [segment_embedding(tokens, *merged)]

    while len(segs) > 1:
        for k, (s, e) in enumerate(segs):
            if e - s != 1:
                continue
            frame_emb = tokens.data[s].mean(axis=0)
            sim_left = cosine_sim(frame_emb, embeds[k - 1]) if k > 0 else -np.inf
            sim_right = cosine_sim(frame_emb, embeds[k + 1]) if k + 1 < len(segs) else -np.inf
            merge(k, k - 1 if sim_left >= sim_right else k + 1)
            break
        else:
            break

    return Segmentation(segments=segs, embeddings=np.vstack(embeds))


def segment_prepared(tokens: VideoTokens, tau: float) -> Segmentation:
    """Boundary detection plus singleton merging on an already-preprocessed tensor."""
    boundaries = find_boundaries(tokens, tau)
    initial = segments_from_boundaries(boundaries, tokens.frames)
    return merge_singletons(initial, tokens)


def segment_video(tokens: VideoTokens, config: PruneConfig) -> Segmentation:
    """Boundary detection followed by singleton merging.

    When ``config.normalize_tokens`` is set, embeddings are computed on
    unit-normalized tokens (normalization is idempotent, so already-normalized
    input is unaffected).
    """
    work = normalize(tokens) if config.normalize_tokens else tokens
    return segment_prepared(work, config.tau)
