"""OCFV feature-file writer/reader (little-endian binary).

Layout: magic "OCFV", u16 version=1, u32 n, u32 d, then n*d f32 values
row-major.  Files are written atomically (temp file + rename) so a
crashed export never leaves a truncated file behind.
"""

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

MAGIC = b"OCFV"
VERSION = 1
HEADER = struct.Struct("<4sHII")


class OcfvError(ValueError):
    """Malformed OCFV content."""


def write_ocfv(path, matrix):
    matrix = np.ascontiguousarray(matrix, dtype="<f4")
    if matrix.ndim != 2:
        raise OcfvError(f"feature matrix must be 2-D, got {matrix.ndim}-D")
    n, d = matrix.shape
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(HEADER.pack(MAGIC, VERSION, n, d))
            fh.write(matrix.tobytes())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_ocfv(path):
    """Load an OCFV file as float64; raises OcfvError with a byte offset
    for truncation and on bad magic/version."""
    blob = Path(path).read_bytes()
    if len(blob) < HEADER.size:
        raise OcfvError(f"{path}: truncated at byte {len(blob)} "
                        f"(header needs {HEADER.size})")
    magic, version, n, d = HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise OcfvError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise OcfvError(f"{path}: unsupported version {version}")
    expected = HEADER.size + 4 * n * d
    if len(blob) != expected:
        raise OcfvError(f"{path}: truncated at byte {len(blob)} "
                        f"(expected {expected})")
    data = np.frombuffer(blob, dtype="<f4", offset=HEADER.size)
    return data.reshape(n, d).astype(np.float64)
