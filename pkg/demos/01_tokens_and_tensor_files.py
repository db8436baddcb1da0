"""Token tensors and the on-disk format.

A video arrives as a dense (frames, tokens_per_frame, dim) array of visual
token embeddings. This demo builds one, saves it in the binary tensor format
(one JSON header line + raw little-endian float32), reads it back, and shows
the round trip is bit-exact.
"""

import tempfile
from pathlib import Path

import numpy as np

from vidprune import VideoTokens, frame_embedding, normalize, read_tokens, write_tokens

rng = np.random.default_rng(0)
tokens = VideoTokens(rng.standard_normal((6, 16, 32)).astype(np.float32))
print(f"video: {tokens.frames} frames x {tokens.tokens_per_frame} tokens x {tokens.dim} dims "
      f"= {tokens.total_tokens} tokens")

unit = normalize(tokens)
norms = np.linalg.norm(unit.data, axis=2)
print(f"after normalize: token norms in [{norms.min():.6f}, {norms.max():.6f}]")

emb = frame_embedding(unit, 0)
print(f"frame 0 embedding: shape {emb.shape}, norm {np.linalg.norm(emb):.4f}")

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "video.tensor"
    write_tokens(path, tokens)
    size = path.stat().st_size
    again = read_tokens(path)
    print(f"tensor file: {size} bytes "
          f"(header {size - 4 * tokens.total_tokens * tokens.dim} + payload)")
    print("round trip bit-identical:", again.data.tobytes() == tokens.data.tobytes())
