"""DYT1 raw tensor files.

Layout, all little-endian:

    b"DYT1" | rank: u32 | dims: rank x u32 | dtype code: u32 | payload

dtype code 0 is float32, 1 is float64; the payload is row-major.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from src.shared import FormatError

from .atomic import atomic_write_bytes

MAGIC = b"DYT1"
DTYPE_CODES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
_CODE_OF = {np.dtype(np.float32): 0, np.dtype(np.float64): 1}

PathLike = Union[str, Path]


def encode_tensor(array: np.ndarray) -> bytes:
    arr = np.asarray(array)
    if arr.dtype not in _CODE_OF:
        arr = arr.astype(np.float64)
    code = _CODE_OF[arr.dtype]
    header = MAGIC + struct.pack(f"<I{arr.ndim}II", arr.ndim, *arr.shape, code)
    return header + np.ascontiguousarray(arr, dtype=DTYPE_CODES[code]).tobytes()


def decode_tensor(data: bytes, source: str = "<bytes>") -> np.ndarray:
    if len(data) < 8 or data[:4] != MAGIC:
        raise FormatError(f"{source}: bad magic, expected {MAGIC!r}")
    (rank,) = struct.unpack_from("<I", data, 4)
    header_size = 8 + 4 * rank + 4
    if len(data) < header_size:
        raise FormatError(f"{source}: truncated header (rank {rank} needs {header_size} bytes, file has {len(data)})")
    dims: Tuple[int, ...] = struct.unpack_from(f"<{rank}I", data, 8)
    (code,) = struct.unpack_from("<I", data, 8 + 4 * rank)
    if code not in DTYPE_CODES:
        raise FormatError(f"{source}: unknown dtype code {code}")

    dtype = DTYPE_CODES[code]
    expected = int(np.prod(dims, dtype=np.int64)) * dtype.itemsize
    payload = len(data) - header_size
    if payload < expected:
        raise FormatError(f"{source}: truncated payload, expected {expected} bytes for dims {dims}, got {payload}")
    if payload > expected:
        raise FormatError(f"{source}: {payload - expected} trailing bytes after payload for dims {dims}")
    values = np.frombuffer(data, dtype=dtype, offset=header_size).reshape(dims)
    return values.astype(dtype.newbyteorder("="), copy=True)


def write_tensor(path: PathLike, array: np.ndarray) -> Path:
    return atomic_write_bytes(path, encode_tensor(array))


def read_tensor(path: PathLike) -> np.ndarray:
    path = Path(path)
    return decode_tensor(path.read_bytes(), source=str(path))
