"""Stage 1: similarity-based frame segmentation.

A synthetic video with three planted shots is segmented by thresholding the
cosine similarity of adjacent frame embeddings at tau = 0.95. Single-frame
fragments (none here) would be merged into their most similar neighbor.
"""

import numpy as np

from vidprune import (
    PruneConfig,
    SegmentSpec,
    SyntheticSpec,
    generate_synthetic,
    normalize,
    segment_video,
)
from vidprune.segmentation import adjacent_similarities, find_boundaries

spec = SyntheticSpec(
    segments=[SegmentSpec(4, 2), SegmentSpec(3, 3, "dynamic"), SegmentSpec(5, 1)],
    tokens_per_frame=32,
    dim=64,
    noise_scale=0.02,
    seed=7,
)
tokens, truth, _ = generate_synthetic(spec)
print(f"planted boundaries (segment ends after these frames): {truth}")

sims = adjacent_similarities(normalize(tokens))
print("adjacent-frame similarities:")
for t, s in enumerate(sims):
    marker = "  <-- boundary" if s < 0.95 else ""
    print(f"  sim(frame {t}, frame {t + 1}) = {s:+.4f}{marker}")

print("detected boundaries:", find_boundaries(normalize(tokens), 0.95))

seg = segment_video(tokens, PruneConfig(retention_ratio=0.25))
print("segments:", seg.segments)
print("segment embedding norms:", np.round(np.linalg.norm(seg.embeddings, axis=1), 4))
