"""Versioned binary checkpoint container.

Layout: header (magic, format version, 32-byte config hash, blob count),
then per blob: name length (u32), utf-8 name, rank (u32), extents (u32 each),
little-endian float32 data. Round-trips bit-exactly.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"PXCK"
VERSION = 1


class CheckpointError(RuntimeError):
    pass


def write_checkpoint(path: str | Path, config_hash: bytes, blobs: dict[str, np.ndarray]) -> None:
    if len(config_hash) != 32:
        raise CheckpointError(f"config hash must be 32 bytes, got {len(config_hash)}")
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", VERSION))
        f.write(config_hash)
        f.write(struct.pack("<I", len(blobs)))
        for name, arr in blobs.items():
            data = np.ascontiguousarray(arr, dtype="<f4")
            encoded = name.encode("utf-8")
            f.write(struct.pack("<I", len(encoded)))
            f.write(encoded)
            f.write(struct.pack("<I", data.ndim))
            f.write(struct.pack(f"<{data.ndim}I", *data.shape))
            f.write(data.tobytes())
    tmp.replace(path)


def read_checkpoint(path: str | Path) -> tuple[bytes, dict[str, np.ndarray]]:
    """Returns (config_hash, {name: float32 array})."""
    path = Path(path)
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != MAGIC:
            raise CheckpointError(f"{path}: bad magic {magic!r}")
        (version,) = struct.unpack("<I", f.read(4))
        if version != VERSION:
            raise CheckpointError(f"{path}: unsupported format version {version}")
        config_hash = f.read(32)
        (count,) = struct.unpack("<I", f.read(4))
        blobs: dict[str, np.ndarray] = {}
        for _ in range(count):
            (name_len,) = struct.unpack("<I", f.read(4))
            name = f.read(name_len).decode("utf-8")
            (rank,) = struct.unpack("<I", f.read(4))
            shape = struct.unpack(f"<{rank}I", f.read(4 * rank)) if rank else ()
            size = int(np.prod(shape)) if shape else 1
            raw = f.read(4 * size)
            if len(raw) != 4 * size:
                raise CheckpointError(f"{path}: truncated blob '{name}'")
            blobs[name] = np.frombuffer(raw, dtype="<f4").reshape(shape).copy()
    return config_hash, blobs


def text_to_blob(text: str) -> np.ndarray:
    """Encode a utf-8 string as a float32 byte array (self-describing checkpoints)."""
    return np.frombuffer(text.encode("utf-8"), dtype=np.uint8).astype(np.float32)


def blob_to_text(blob: np.ndarray) -> str:
    return blob.astype(np.uint8).tobytes().decode("utf-8")
