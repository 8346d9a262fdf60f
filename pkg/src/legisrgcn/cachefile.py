"""Binary file formats: embedding cache and named-tensor checkpoints.

Embedding cache layout (little-endian):
    magic b"LGRC" | version u32 | d_doc u32
    rows: key_len u32 | key bytes (utf-8) | d_doc float32

Checkpoint layout reuses the row format but stores d_doc = 0 in the header
and prefixes each row's payload with rank u32 and the shape, so tensors of
any shape round-trip.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"LGRC"
VERSION = 1


class CacheFormatError(Exception):
    pass


def write_cache(path: Path, vectors: dict[str, np.ndarray], dim: int) -> None:
    with open(path, "wb") as handle:
        handle.write(MAGIC)
        handle.write(struct.pack("<II", VERSION, dim))
        for key in sorted(vectors):
            vec = np.asarray(vectors[key], dtype="<f4")
            if vec.shape != (dim,):
                raise CacheFormatError(f"{key}: expected shape ({dim},), got {vec.shape}")
            encoded = key.encode("utf-8")
            handle.write(struct.pack("<I", len(encoded)))
            handle.write(encoded)
            handle.write(vec.tobytes())


def read_cache(path: Path) -> tuple[int, dict[str, np.ndarray]]:
    with open(path, "rb") as handle:
        data = handle.read()
    if data[:4] != MAGIC:
        raise CacheFormatError(f"{path}: bad magic")
    version, dim = struct.unpack_from("<II", data, 4)
    if version != VERSION:
        raise CacheFormatError(f"{path}: unsupported version {version}")
    offset = 12
    vectors: dict[str, np.ndarray] = {}
    while offset < len(data):
        (key_len,) = struct.unpack_from("<I", data, offset)
        offset += 4
        key = data[offset : offset + key_len].decode("utf-8")
        offset += key_len
        vec = np.frombuffer(data, dtype="<f4", count=dim, offset=offset).copy()
        offset += 4 * dim
        vectors[key] = vec
    return dim, vectors


def write_tensors(path: Path, tensors: dict[str, np.ndarray]) -> None:
    with open(path, "wb") as handle:
        handle.write(MAGIC)
        handle.write(struct.pack("<II", VERSION, 0))
        for key in sorted(tensors):
            arr = np.asarray(tensors[key], dtype="<f4")
            encoded = key.encode("utf-8")
            handle.write(struct.pack("<I", len(encoded)))
            handle.write(encoded)
            handle.write(struct.pack("<I", arr.ndim))
            handle.write(struct.pack("<%dI" % arr.ndim, *arr.shape))
            handle.write(arr.tobytes())


def read_tensors(path: Path) -> dict[str, np.ndarray]:
    with open(path, "rb") as handle:
        data = handle.read()
    if data[:4] != MAGIC:
        raise CacheFormatError(f"{path}: bad magic")
    version, dim = struct.unpack_from("<II", data, 4)
    if version != VERSION or dim != 0:
        raise CacheFormatError(f"{path}: not a tensor file")
    offset = 12
    tensors: dict[str, np.ndarray] = {}
    while offset < len(data):
        (key_len,) = struct.unpack_from("<I", data, offset)
        offset += 4
        key = data[offset : offset + key_len].decode("utf-8")
        offset += key_len
        (rank,) = struct.unpack_from("<I", data, offset)
        offset += 4
        shape = struct.unpack_from("<%dI" % rank, data, offset)
        offset += 4 * rank
        count = int(np.prod(shape)) if rank else 1
        arr = np.frombuffer(data, dtype="<f4", count=count, offset=offset)
        offset += 4 * count
        tensors[key] = arr.reshape(shape).copy()
    return tensors
