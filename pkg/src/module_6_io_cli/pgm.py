"""16-bit binary PGM depth maps: depth in meters = sample / 256, sample 0 = missing."""

from __future__ import annotations

from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from src.shared import DepthGrid, FormatError

from .atomic import atomic_write_bytes

MAXVAL = 65535
SAMPLES_PER_METER = 256.0
MAX_DEPTH_M = MAXVAL / SAMPLES_PER_METER

PathLike = Union[str, Path]
_WHITESPACE = b" \t\r\n"


def depth_to_samples(depth: Union[DepthGrid, np.ndarray], source: str = "<depth>") -> np.ndarray:
    values = np.asarray(depth.values if isinstance(depth, DepthGrid) else depth, dtype=np.float64)
    if values.ndim != 2:
        raise FormatError(f"{source}: depth must be 2-D, got shape {values.shape}")
    if np.any(values > MAX_DEPTH_M):
        raise FormatError(f"{source}: depth {float(values.max()):.4f} m exceeds the PGM limit of {MAX_DEPTH_M} m")
    if np.any(values < 0) or not np.all(np.isfinite(values)):
        raise FormatError(f"{source}: depth must be finite and >= 0")
    return np.rint(values * SAMPLES_PER_METER).astype(np.uint16)


def encode_pgm(depth: Union[DepthGrid, np.ndarray], source: str = "<depth>") -> bytes:
    samples = depth_to_samples(depth, source)
    height, width = samples.shape
    header = f"P5\n{width} {height}\n{MAXVAL}\n".encode("ascii")
    return header + samples.astype(">u2").tobytes()


def _header_tokens(data: bytes, source: str) -> Tuple[List[bytes], int]:
    """Magic, width, height, maxval and the offset of the first raster byte."""
    tokens: List[bytes] = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos] in _WHITESPACE:
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and data[pos] not in _WHITESPACE and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise FormatError(f"{source}: truncated PGM header")
        tokens.append(data[start:pos])
    if pos >= len(data) or data[pos] not in _WHITESPACE:
        raise FormatError(f"{source}: truncated PGM header")
    # Exactly one whitespace byte separates maxval from the raster.
    return tokens, pos + 1


def decode_pgm(data: bytes, source: str = "<bytes>") -> DepthGrid:
    if data[:2] != b"P5":
        raise FormatError(f"{source}: bad magic, expected P5")
    tokens, offset = _header_tokens(data, source)
    try:
        width, height, maxval = (int(tok) for tok in tokens[1:])
    except ValueError:
        raise FormatError(f"{source}: non-numeric PGM header field") from None
    if maxval != MAXVAL:
        raise FormatError(f"{source}: maxval must be {MAXVAL}, got {maxval}")
    if width < 1 or height < 1:
        raise FormatError(f"{source}: bad dimensions {width}x{height}")

    expected = 2 * width * height
    payload = len(data) - offset
    if payload < expected:
        raise FormatError(f"{source}: truncated raster, expected {expected} bytes for {width}x{height}, got {payload}")
    if payload > expected:
        raise FormatError(f"{source}: {payload - expected} trailing bytes after raster")
    samples = np.frombuffer(data, dtype=">u2", offset=offset).reshape(height, width)
    return DepthGrid(samples.astype(np.float64) / SAMPLES_PER_METER)


def write_depth_pgm(path: PathLike, depth: Union[DepthGrid, np.ndarray]) -> Path:
    return atomic_write_bytes(path, encode_pgm(depth, source=str(path)))


def read_depth_pgm(path: PathLike) -> DepthGrid:
    path = Path(path)
    return decode_pgm(path.read_bytes(), source=str(path))
