"""Binary PGM (P5, 8-bit) image input/output with values scaled to [0, 1]."""

from __future__ import annotations

import numpy as np


def _tokens(data: bytes, count: int):
    """First ``count`` header tokens and the offset just past the last one."""
    out, i, n = [], 0, len(data)
    while len(out) < count:
        while i < n and data[i:i + 1].isspace():
            i += 1
        if i < n and data[i:i + 1] == b"#":
            while i < n and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < n and not data[j:j + 1].isspace():
            j += 1
        if j == i:
            raise ValueError("truncated PGM header")
        out.append(data[i:j])
        i = j
    return out, i + 1  # exactly one whitespace byte precedes the raster


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    (magic, w, h, maxval), off = _tokens(data, 4)
    if magic != b"P5":
        raise ValueError(f"not a binary PGM file (magic {magic!r})")
    w, h, maxval = int(w), int(h), int(maxval)
    if not 0 < maxval < 256:
        raise ValueError("only 8-bit PGM files are supported")
    raster = np.frombuffer(data, dtype=np.uint8, count=w * h, offset=off)
    return raster.reshape(h, w).astype(np.float64) / maxval


def write_pgm(path, image) -> None:
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("image must be 2-D")
    raster = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    h, w = raster.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(raster.tobytes())
