import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vidprune import (
    InvalidInputError,
    PruneConfig,
    QualityModel,
    SegmentSpec,
    SelectionResult,
    SyntheticSpec,
    VideoTokens,
    coverage,
    generate_synthetic,
    oracle_best_subset,
    quality,
    redundancy,
    segment_video,
    sweep_lambda,
)
from vidprune.segmentation import adjacent_similarities

import oracles


class TestQuality:
    def test_empty_subset(self):
        rng = np.random.default_rng(0)
        assert quality([], rng.standard_normal((8, 4)), QualityModel()) == 0.0

    def test_beta_zero_is_importance_sum(self):
        rng = np.random.default_rng(1)
        flat = rng.standard_normal((8, 4))
        model = QualityModel(beta=0.0)
        got = quality([1, 5, 6], flat, model)
        assert got == pytest.approx(float(model.importance(flat)[[1, 5, 6]].sum()))

    def test_matches_exhaustive_naive(self):
        rng = np.random.default_rng(2)
        flat = rng.standard_normal((8, 4))
        for combo in itertools.combinations(range(8), 4):
            got = quality(combo, flat, QualityModel(beta=1.0))
            want = oracles.quality(combo, flat, 1.0)
            assert got == pytest.approx(want, abs=1e-10)

    def test_duplicate_indices_rejected(self):
        rng = np.random.default_rng(3)
        with pytest.raises(InvalidInputError):
            quality([1, 1], rng.standard_normal((4, 3)), QualityModel())

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_permutation_invariant(self, seed):
        rng = np.random.default_rng(seed)
        flat = rng.standard_normal((9, 5))
        subset = list(rng.choice(9, size=4, replace=False))
        shuffled = list(rng.permutation(subset))
        m = QualityModel(beta=0.7)
        assert quality(subset, flat, m) == pytest.approx(quality(shuffled, flat, m))

    def test_model_bounds_and_symmetry(self):
        rng = np.random.default_rng(4)
        flat = rng.standard_normal((10, 6))
        m = QualityModel()
        imp = m.importance(flat)
        red = m.redundancy_matrix(flat)
        assert ((0.0 <= imp) & (imp <= 1.0)).all()
        assert ((red >= -1e-12) & (red <= 1.0 + 1e-12)).all()
        assert np.allclose(red, red.T)


class TestOracleBestSubset:
    def test_budget_equals_count(self):
        rng = np.random.default_rng(5)
        flat = rng.standard_normal((6, 3))
        subset, _ = oracle_best_subset(flat, 6, QualityModel())
        assert subset == tuple(range(6))

    def test_budget_one_is_importance_argmax(self):
        rng = np.random.default_rng(6)
        flat = rng.standard_normal((9, 4))
        m = QualityModel(beta=3.0)
        subset, q = oracle_best_subset(flat, 1, m)
        assert subset == (int(np.argmax(m.importance(flat))),)
        assert q == pytest.approx(float(m.importance(flat).max()))

    def test_rejects_large_instances(self):
        with pytest.raises(InvalidInputError):
            oracle_best_subset(np.ones((17, 2)), 3, QualityModel())

    def test_matches_second_enumeration_order(self):
        rng = np.random.default_rng(5)
        flat = rng.standard_normal((12, 6))
        m = QualityModel(beta=1.0)
        subset, q = oracle_best_subset(flat, 4, m)
        # independent enumeration in reversed order, collecting all argmaxes
        scored = [
            (oracles.quality(c, flat, 1.0), c)
            for c in reversed(list(itertools.combinations(range(12), 4)))
        ]
        best_q = max(s for s, _ in scored)
        argmaxes = sorted(c for s, c in scored if s == pytest.approx(best_q, abs=1e-12))
        assert q == pytest.approx(best_q, abs=1e-10)
        assert subset == argmaxes[0]

    def test_upper_bounds_any_subset(self):
        rng = np.random.default_rng(7)
        flat = rng.standard_normal((10, 4))
        m = QualityModel()
        _, q = oracle_best_subset(flat, 3, m)
        for _ in range(20):
            pick = rng.choice(10, size=3, replace=False)
            assert q >= quality(pick, flat, m) - 1e-12


class TestCoverageRedundancy:
    def test_keep_everything(self):
        rng = np.random.default_rng(8)
        t = VideoTokens(rng.standard_normal((3, 4, 5)))
        kept = SelectionResult(kept=[np.arange(4)] * 3)
        assert coverage(kept, t) == pytest.approx(1.0)

    def test_single_kept_among_duplicates(self):
        t = VideoTokens(np.ones((2, 3, 4)))
        kept = SelectionResult(kept=[np.array([0]), np.array([], dtype=np.int64)])
        assert coverage(kept, t) == pytest.approx(1.0)

    def test_coverage_matches_naive(self):
        rng = np.random.default_rng(13)
        t = VideoTokens(rng.standard_normal((3, 5, 4)))
        kept = SelectionResult(kept=[np.array([0, 2]), np.array([1]), np.array([3, 4])])
        got = coverage(kept, t)
        flat_idx = kept.flat_indices(5)
        assert got == pytest.approx(oracles.coverage(flat_idx, t.flat()), abs=1e-10)

    def test_coverage_monotone_under_additions(self):
        rng = np.random.default_rng(14)
        t = VideoTokens(rng.standard_normal((2, 6, 4)))
        smaller = SelectionResult(kept=[np.array([1]), np.array([2])])
        larger = SelectionResult(kept=[np.array([1, 4]), np.array([2])])
        assert coverage(larger, t) >= coverage(smaller, t) - 1e-12

    def test_redundancy_of_identical_tokens(self):
        t = VideoTokens(np.ones((1, 4, 3)))
        kept = SelectionResult(kept=[np.array([0, 1, 2])])
        assert redundancy(kept, t) == pytest.approx(1.0)

    def test_redundancy_of_orthogonal_pair(self):
        t = VideoTokens(np.eye(2)[None, :, :])
        kept = SelectionResult(kept=[np.array([0, 1])])
        assert redundancy(kept, t) == pytest.approx(0.5)

    def test_redundancy_matches_naive(self):
        rng = np.random.default_rng(2)
        t = VideoTokens(rng.standard_normal((2, 4, 5)))
        kept = SelectionResult(kept=[np.array([0, 3]), np.array([1, 2])])
        got = redundancy(kept, t)
        assert got == pytest.approx(oracles.redundancy(kept.flat_indices(4), t.flat()), abs=1e-10)

    def test_redundancy_needs_two(self):
        t = VideoTokens(np.ones((1, 2, 2)))
        with pytest.raises(InvalidInputError):
            redundancy(SelectionResult(kept=[np.array([0])]), t)


class TestGenerateSynthetic:
    def spec(self, **kw):
        base = dict(
            segments=[SegmentSpec(3, 2), SegmentSpec(4, 1, "dynamic")],
            tokens_per_frame=16,
            dim=48,
            noise_scale=0.0,
            seed=0,
        )
        base.update(kw)
        return SyntheticSpec(**base)

    def test_noise_free_similarity_structure(self):
        spec = SyntheticSpec(
            segments=[SegmentSpec(3, 2), SegmentSpec(3, 2)],
            tokens_per_frame=16, dim=32, noise_scale=0.0, seed=4,
        )
        tokens, bounds, _ = generate_synthetic(spec)
        sims = adjacent_similarities(tokens)
        assert bounds == [2]
        assert sims[2] == pytest.approx(0.0, abs=1e-6)
        for t in (0, 1, 3, 4):
            assert sims[t] == pytest.approx(1.0, abs=1e-6)

    def test_same_seed_bit_identical(self):
        a, _, _ = generate_synthetic(self.spec())
        b, _, _ = generate_synthetic(self.spec())
        assert a.data.tobytes() == b.data.tobytes()

    def test_novel_positions_recorded_per_dynamic_frame(self):
        spec = self.spec(novel_per_frame=2)
        tokens, bounds, novel = generate_synthetic(spec)
        frames_with_novel = sorted({f for f, _ in novel})
        assert frames_with_novel == [4, 5, 6]  # dynamic segment frames after its anchor
        assert len(novel) == 6

    def test_infeasible_specs_rejected(self):
        with pytest.raises(InvalidInputError):
            generate_synthetic(self.spec(segments=[SegmentSpec(2, 40)]))
        with pytest.raises(InvalidInputError):
            SyntheticSpec(segments=[SegmentSpec(1, 1)], tokens_per_frame=8, dim=8)
        with pytest.raises(InvalidInputError):
            generate_synthetic(
                self.spec(segments=[SegmentSpec(20, 2, "dynamic")], dim=16)
            )

    def test_spec_roundtrip_via_dict(self):
        spec = self.spec(background_fraction=0.25)
        again = SyntheticSpec.from_dict(spec.to_dict())
        assert again == spec

    def test_float32_exact(self):
        tokens, _, _ = generate_synthetic(self.spec(noise_scale=0.05))
        assert np.array_equal(tokens.data.astype(np.float32).astype(np.float64), tokens.data)


class TestSweepLambda:
    def test_endpoints_and_weight_movement(self):
        spec = SyntheticSpec(
            segments=[SegmentSpec(3, 2), SegmentSpec(3, 2), SegmentSpec(3, 2), SegmentSpec(3, 2)],
            tokens_per_frame=12, dim=48, noise_scale=0.01, seed=3,
        )
        tokens, _, _ = generate_synthetic(spec)
        cfg = PruneConfig(retention_ratio=0.5)
        entries = sweep_lambda(tokens, cfg)
        assert [e.lam for e in entries] == [0.0, 0.2, 0.4, 0.5, 0.6, 0.8, 1.0]
        seg = segment_video(tokens, cfg)
        assert all(len(e.order) == len(seg) for e in entries)
        weights = [(1.0 - e.lam) * float(np.mean(e.diversity)) for e in entries]
        assert all(a >= b - 1e-12 for a, b in zip(weights, weights[1:]))
