import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vidprune import (
    PruneConfig,
    VideoTokens,
    find_boundaries,
    generate_synthetic,
    merge_singletons,
    segment_video,
    SegmentSpec,
    SyntheticSpec,
)
from vidprune.segmentation import segments_from_boundaries

import oracles


def frames_from_dirs(dirs, m=4, noise=0.0, seed=0):
    """One frame per direction row, every token a noisy copy of the direction."""
    rng = np.random.default_rng(seed)
    dirs = np.asarray(dirs, dtype=float)
    data = np.repeat(dirs[:, None, :], m, axis=1) + noise * rng.standard_normal(
        (len(dirs), m, dirs.shape[1])
    )
    return VideoTokens(data)


class TestFindBoundaries:
    def test_identical_frames_no_boundary(self):
        t = frames_from_dirs([[1, 0, 0]] * 5)
        assert find_boundaries(t, 0.95) == []

    def test_orthogonal_block_boundary(self):
        dirs = [[1, 0, 0]] * 3 + [[0, 1, 0]] * 3
        t = frames_from_dirs(dirs)
        assert find_boundaries(t, 0.95) == [2]

    def test_single_frame(self):
        t = frames_from_dirs([[1, 0, 0]])
        assert find_boundaries(t, 0.95) == []

    def test_random_walk_matches_naive_scan(self):
        rng = np.random.default_rng(7)
        t = VideoTokens(np.cumsum(rng.standard_normal((12, 3, 6)), axis=0))
        assert find_boundaries(t, 0.95) == oracles.boundaries(t.data, 0.95)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_monotone_in_tau(self, seed):
        rng = np.random.default_rng(seed)
        t = VideoTokens(rng.standard_normal((8, 3, 4)))
        lo = find_boundaries(t, 0.3)
        hi = find_boundaries(t, 0.95)
        assert set(lo) <= set(hi)


class TestMergeSingletons:
    def test_single_neighbor(self):
        t = frames_from_dirs([[1, 0], [1, 0], [1, 0]])
        seg = merge_singletons([(0, 1), (1, 3)], t)
        assert seg.segments == [(0, 3)]

    def test_orthogonal_middle_frame(self):
        # frames A B A A with B orthogonal to A
        t = frames_from_dirs([[1, 0], [0, 1], [1, 0], [1, 0]])
        initial = segments_from_boundaries(find_boundaries(t, 0.95), 4)
        assert initial == [(0, 1), (1, 2), (2, 4)]
        seg = merge_singletons(initial, t)
        assert seg.segments == oracles.merge_singletons(initial, t.data)

    def test_no_singletons_is_fixed_point(self):
        t = frames_from_dirs([[1, 0]] * 4 + [[0, 1]] * 2)
        segs = [(0, 4), (4, 6)]
        out = merge_singletons(segs, t)
        assert out.segments == segs
        again = merge_singletons(out.segments, t)
        assert again.segments == out.segments
        assert np.allclose(again.embeddings, out.embeddings)

    def test_tie_merges_left(self):
        # singleton equally similar to both neighbors
        t = frames_from_dirs([[1, 0], [1, 0], [1, 1], [1, 0], [1, 0]])
        seg = merge_singletons([(0, 2), (2, 3), (3, 5)], t)
        assert seg.segments[0] == (0, 3)

    def test_embeddings_are_segment_means(self):
        rng = np.random.default_rng(3)
        t = VideoTokens(rng.standard_normal((6, 4, 5)))
        seg = merge_singletons([(0, 3), (3, 6)], t)
        for (s, e), emb in zip(seg.segments, seg.embeddings):
            assert np.allclose(emb, t.data[s:e].reshape(-1, 5).mean(axis=0))

    @given(st.integers(0, 2**32 - 1), st.integers(2, 12))
    @settings(max_examples=40, deadline=None)
    def test_matches_naive_and_partitions(self, seed, frames):
        rng = np.random.default_rng(seed)
        t = VideoTokens(rng.standard_normal((frames, 3, 4)))
        initial = segments_from_boundaries(find_boundaries(t, 0.5), frames)
        seg = merge_singletons(initial, t)
        assert seg.segments == oracles.merge_singletons(initial, t.data)
        # partition of [0, frames)
        cursor = 0
        for s, e in seg.segments:
            assert s == cursor and e > s
            cursor = e
        assert cursor == frames
        if frames >= 2:
            assert all(e - s >= 2 for s, e in seg.segments) or len(seg.segments) == 1
        # merging is idempotent on its own output
        again = merge_singletons(seg.segments, t)
        assert again.segments == seg.segments


class TestSegmentVideo:
    def test_single_frame(self):
        t = frames_from_dirs([[1, 0, 0]])
        seg = segment_video(t, PruneConfig(retention_ratio=0.5))
        assert seg.segments == [(0, 1)]

    def test_tau_minus_one_single_segment(self):
        rng = np.random.default_rng(0)
        t = VideoTokens(rng.standard_normal((9, 3, 4)))
        seg = segment_video(t, PruneConfig(retention_ratio=0.5, tau=-0.999999))
        assert seg.segments == [(0, 9)]

    def test_planted_boundaries_recovered(self):
        spec = SyntheticSpec(
            segments=[SegmentSpec(4, 2), SegmentSpec(3, 3), SegmentSpec(5, 1)],
            tokens_per_frame=24,
            dim=32,
            noise_scale=0.01,
            seed=21,
        )
        tokens, truth, _ = generate_synthetic(spec)
        seg = segment_video(tokens, PruneConfig(retention_ratio=0.5))
        got = [e - 1 for _, e in seg.segments[:-1]]
        assert got == truth

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=20, deadline=None)
    def test_deterministic(self, seed):
        rng = np.random.default_rng(seed)
        t = VideoTokens(rng.standard_normal((7, 3, 4)))
        cfg = PruneConfig(retention_ratio=0.5)
        a = segment_video(t, cfg)
        b = segment_video(t, cfg)
        assert a.segments == b.segments
        assert np.array_equal(a.embeddings, b.embeddings)
