import json
import threading

import numpy as np
import pytest

import vidprune
import vidprune_bindings as vb
from vidprune.cli import cli_main


def seeded_tensor(seed):
    rng = np.random.default_rng(seed)
    if seed % 2 == 0:
        f, m, d = int(rng.integers(2, 8)), int(rng.integers(4, 16)), int(rng.integers(4, 24))
        data = rng.standard_normal((f, m, d)).astype(np.float32)
        return vidprune.VideoTokens(data)
    spec = vidprune.SyntheticSpec(
        segments=[
            vidprune.SegmentSpec(int(rng.integers(2, 5)), int(rng.integers(1, 3)),
                                 "dynamic" if rng.random() < 0.5 else "static")
            for _ in range(int(rng.integers(1, 4)))
        ],
        tokens_per_frame=int(rng.integers(8, 20)),
        dim=64,
        noise_scale=0.02,
        seed=seed,
    )
    tokens, _, _ = vidprune.generate_synthetic(spec)
    return tokens


class TestCliParity:
    def test_50_seeded_tensors_field_identical(self, tmp_path):
        for seed in range(50):
            tokens = seeded_tensor(seed)
            ratio = [0.25, 0.4, 0.6][seed % 3]
            tensor_path = tmp_path / f"t{seed}.tensor"
            out_path = tmp_path / f"r{seed}.json"
            vidprune.write_tokens(tensor_path, tokens)
            code = cli_main([
                "prune", "--input", str(tensor_path), "--ratio", str(ratio),
                "--output", str(out_path),
            ])
            assert code == 0
            cli_doc = json.loads(out_path.read_text())
            got = vb.prune(tokens.data, retention_ratio=ratio)
            assert got["kept"] == cli_doc["kept"]
            assert got["segments"] == cli_doc["segments"]

    def test_metrics_parity_with_cli_eval(self, tmp_path):
        tokens = seeded_tensor(3)
        tensor_path = tmp_path / "t.tensor"
        out_path = tmp_path / "r.json"
        vidprune.write_tokens(tensor_path, tokens)
        assert cli_main([
            "eval", "--input", str(tensor_path), "--ratio", "0.5", "--metrics",
            "--output", str(out_path),
        ]) == 0
        doc = json.loads(out_path.read_text())
        kept = vb.prune(tokens.data, retention_ratio=0.5)["kept"]
        assert vb.coverage(tokens.data, kept) == doc["metrics"]["coverage"]
        assert vb.redundancy(tokens.data, kept) == doc["metrics"]["redundancy"]
        assert vb.quality(tokens.data, kept) == doc["metrics"]["quality"]


class TestSurface:
    def test_full_retention(self):
        tokens = seeded_tensor(2)
        got = vb.prune(tokens.data, retention_ratio=1.0)
        assert all(k == list(range(tokens.tokens_per_frame)) for k in got["kept"])

    def test_defaults_match_operating_point(self):
        cfg = vidprune.PruneConfig(retention_ratio=0.25)
        assert cfg.tau == 0.95
        assert cfg.lam == 0.5
        got = vb.prune(seeded_tensor(4).data, retention_ratio=0.25)
        assert len(got["segments"]) >= 1

    def test_invalid_shape_raises_exit1_error(self):
        with pytest.raises(vb.InvalidInputError) as err:
            vb.prune(np.ones((3, 4)), retention_ratio=0.5)
        assert err.value.exit_code == 1

    def test_nan_raises_exit1_error(self):
        bad = np.zeros((2, 2, 2))
        bad[0, 0, 0] = np.nan
        with pytest.raises(vb.InvalidInputError):
            vb.prune(bad, retention_ratio=0.5)

    def test_bad_ratio_raises_exit1_error(self):
        with pytest.raises(vb.InvalidInputError):
            vb.prune(np.ones((2, 2, 2)), retention_ratio=1.5)

    def test_unknown_keyword_raises_exit1_error(self):
        with pytest.raises(vb.InvalidInputError):
            vb.prune(np.ones((2, 2, 2)), retention_ratio=0.5, bogus=1)

    def test_missing_ratio_raises_exit1_error(self):
        with pytest.raises(vb.InvalidInputError):
            vb.prune(np.ones((2, 2, 2)))

    def test_infeasible_raises_exit2_error(self):
        rng = np.random.default_rng(0)
        with pytest.raises(vb.InfeasibleBudgetError) as err:
            vb.prune(rng.standard_normal((10, 4, 3)), retention_ratio=0.05)
        assert err.value.exit_code == 2

    def test_contiguous_float64_not_copied(self):
        data = np.ascontiguousarray(np.random.default_rng(1).standard_normal((3, 4, 5)))
        wrapped = vidprune.VideoTokens(data)
        assert wrapped.data is data

    def test_float32_input_accepted(self):
        data = np.random.default_rng(1).standard_normal((3, 4, 5)).astype(np.float32)
        got = vb.prune(data, retention_ratio=0.5)
        assert sum(len(k) for k in got["kept"]) == round(0.5 * 12)


class TestConcurrency:
    def test_threaded_calls_match_sequential(self):
        tensors = [seeded_tensor(s) for s in range(8)]
        sequential = [vb.prune(t.data, retention_ratio=0.3) for t in tensors]
        results = [None] * len(tensors)

        def work(i):
            results[i] = vb.prune(tensors[i].data, retention_ratio=0.3)

        threads = [threading.Thread(target=work, args=(i,)) for i in range(len(tensors))]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert results == sequential
