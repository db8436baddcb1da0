"""Stage 2: marginal-value ordering and dynamic budget allocation.

Three segments: a static shot, a very different dynamic shot, and a near
duplicate of the first shot. Segments are picked greedily by marginal value
(representativeness toward the not-yet-selected content, diversity against
what is already selected, balanced by lambda). The duplicate's diversity
term collapses once its twin is in, so its recorded MV - and therefore its
z-score-derived budget - drops, while the distinct dynamic shot wins budget.
"""

import numpy as np

from vidprune import PruneConfig, allocate, order_segments, segment_video
from vidprune.budgeting import ordering_trace

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "tests"))
from video_fixtures import fig_style_video

tokens, dyn_index = fig_style_video(seed=1)
config = PruneConfig(retention_ratio=0.25, lam=0.2)

seg = segment_video(tokens, config)
print("segments:", seg.segments, f"(dynamic segment is #{dyn_index})")

print("\ngreedy selection trace (lambda = 0.2):")
for step, s in enumerate(ordering_trace(seg.embeddings, config.lam)):
    print(f"  step {step}: picked segment {s.segment}  "
          f"MV = {s.mv:.4f}  rep = {s.representativeness:+.4f}  div = {s.diversity:+.4f}")

order, mv = order_segments(seg, config.lam)
alloc = allocate(mv, seg, config, tokens.tokens_per_frame, tokens.total_tokens, order=order)
target = round(config.retention_ratio * tokens.total_tokens)
print(f"\nallocation under global budget round(0.25 * {tokens.total_tokens}) = {target}:")
for k, (s, e) in enumerate(seg.segments):
    tag = "  <-- dynamic" if k == dyn_index else ""
    print(f"  segment {k} [{s},{e}): ratio {alloc.ratios[k]:.3f}, "
          f"{alloc.base_counts[k]} tokens/frame{tag}")
print("total kept:", alloc.total_kept, "== target:", alloc.total_kept == target)
