"""On-disk token tensor format: one JSON header line, then raw little-endian floats.

The header is a single UTF-8 JSON object terminated by a newline byte::

    {"frames": F, "tokens_per_frame": M, "dim": d, "dtype": "f32", "layout": "frame_major"}

followed by exactly 4*F*M*d payload bytes: 32-bit little-endian floats,
frame-major, token-minor, dim-innermost. Reading and writing round-trip
bit-identically.
"""

from __future__ import annotations

import json
from os import PathLike

import numpy as np

from .core import VideoTokens
from .errors import InvalidInputError

_DTYPE = "f32"
_LAYOUT = "frame_major"


def write_tokens(path: str | PathLike, tokens: VideoTokens) -> None:
    """Write a token tensor; in-memory values are stored at float32 precision."""
    header = {
        "frames": tokens.frames,
        "tokens_per_frame": tokens.tokens_per_frame,
        "dim": tokens.dim,
        "dtype": _DTYPE,
        "layout": _LAYOUT,
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, separators=(", ", ": ")).encode("utf-8"))
        fh.write(b"\n")
        fh.write(np.ascontiguousarray(tokens.data, dtype="<f4").tobytes())


def _read_header_line(fh) -> bytes:
    line = bytearray()
    while True:
        byte = fh.read(1)
        if not byte:
            raise InvalidInputError("tensor file ended before the header line terminated")
        if byte == b"\n":
            return bytes(line)
        line.extend(byte)
        if len(line) > 4096:
            raise InvalidInputError("tensor file header exceeds 4096 bytes")


def read_tokens(path: str | PathLike) -> VideoTokens:
    """Read a token tensor, validating the header against the payload size."""
    with open(path, "rb") as fh:
        raw = _read_header_line(fh)
        try:
            header = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise InvalidInputError(f"tensor file header is not valid JSON: {exc}") from exc
        payload = fh.read()

    for key in ("frames", "tokens_per_frame", "dim"):
        if not isinstance(header.get(key), int) or header[key] < 1:
            raise InvalidInputError(f"tensor header field {key!r} must be a positive integer")
    if header.get("dtype") != _DTYPE:
        raise InvalidInputError(f"unsupported tensor dtype {header.get('dtype')!r}")
    if header.get("layout") != _LAYOUT:
        raise InvalidInputError(f"unsupported tensor layout {header.get('layout')!r}")

    f, m, d = header["frames"], header["tokens_per_frame"], header["dim"]
    expected = 4 * f * m * d
    if len(payload) != expected:
        raise InvalidInputError(
            f"tensor payload is {len(payload)} bytes, header implies exactly {expected}"
        )
    data = np.frombuffer(payload, dtype="<f4").reshape(f, m, d)
    return VideoTokens(data)
