"""Little-endian binary containers for trained models.

Two magics share one container style: "OCNN" for network models and
"OCBL" for baseline models (one method tag byte, then a method-specific
payload).  Parameters are stored as f32; the in-memory core is f64, so a
save widens back exactly and save -> load -> save is byte-identical.
"""

import json
import struct

import numpy as np

from .exceptions import ParseError
from .nn import Dense, InstanceNormSpec, NetworkConfig, NetworkParams

NETWORK_MAGIC = b"OCNN"
BASELINE_MAGIC = b"OCBL"
FORMAT_VERSION = 1

_FLAG_CLASSIFIER_RELU = 1
_FLAG_AFFINE = 2


class ByteWriter:
    def __init__(self):
        self.chunks = []

    def pack(self, fmt, *values):
        self.chunks.append(struct.pack("<" + fmt, *values))

    def put_f32_array(self, arr):
        self.chunks.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())

    def getvalue(self):
        return b"".join(self.chunks)


class ByteReader:
    """Cursor over bytes; any short read raises ParseError with the offset."""

    def __init__(self, data, source="<bytes>"):
        self.data = data
        self.offset = 0
        self.source = source

    def take(self, n):
        if self.offset + n > len(self.data):
            raise ParseError(
                f"{self.source}: truncated at byte {self.offset} "
                f"(needed {n} more, have {len(self.data) - self.offset})"
            )
        chunk = self.data[self.offset:self.offset + n]
        self.offset += n
        return chunk

    def unpack(self, fmt):
        fmt = "<" + fmt
        values = struct.unpack(fmt, self.take(struct.calcsize(fmt)))
        return values[0] if len(values) == 1 else values

    def get_f32_array(self, count):
        raw = self.take(4 * count)
        return np.frombuffer(raw, dtype="<f4").astype(np.float64)

    def expect_magic(self, magic):
        got = self.take(len(magic))
        if got != magic:
            raise ParseError(f"{self.source}: bad magic {got!r}, expected {magic!r}")

    def expect_end(self):
        if self.offset != len(self.data):
            raise ParseError(
                f"{self.source}: {len(self.data) - self.offset} trailing "
                f"bytes at offset {self.offset}"
            )


def dump_metadata(meta):
    """Deterministic JSON bytes (sorted keys, no whitespace)."""
    return json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")


# ---------------------------------------------------------------------------
# network container


def network_to_bytes(config, params, metadata=None):
    w = ByteWriter()
    w.pack("4s", NETWORK_MAGIC)
    w.pack("H", FORMAT_VERSION)
    flags = 0
    if config.classifier_activation == "relu":
        flags |= _FLAG_CLASSIFIER_RELU
    if config.norm.affine:
        flags |= _FLAG_AFFINE
    w.pack("H", flags)
    w.pack("d", config.norm.epsilon)
    dims = config.head_dims
    w.pack("I", len(dims))
    for d in dims:
        w.pack("I", d)
    for arr in params.arrays():
        w.put_f32_array(arr)
    meta_bytes = dump_metadata(metadata) if metadata is not None else b""
    w.pack("I", len(meta_bytes))
    w.chunks.append(meta_bytes)
    return w.getvalue()


def network_from_bytes(data, source="<bytes>"):
    r = ByteReader(data, source)
    r.expect_magic(NETWORK_MAGIC)
    version = r.unpack("H")
    if version != FORMAT_VERSION:
        raise ParseError(f"{source}: unsupported version {version}")
    flags = r.unpack("H")
    epsilon = r.unpack("d")
    ndims = r.unpack("I")
    if ndims < 2:
        raise ParseError(f"{source}: dim list needs >= 2 entries, got {ndims}")
    dims = [r.unpack("I") for _ in range(ndims)]
    config = NetworkConfig(
        input_dim=dims[0],
        feature_dim=dims[-1],
        head_hidden_dims=tuple(dims[1:-1]),
        classifier_activation="relu" if flags & _FLAG_CLASSIFIER_RELU else "none",
        norm=InstanceNormSpec(epsilon=epsilon, affine=bool(flags & _FLAG_AFFINE)),
    )

    def read_dense(fan_in, fan_out):
        weights = r.get_f32_array(fan_in * fan_out).reshape(fan_in, fan_out)
        bias = r.get_f32_array(fan_out)
        return Dense(weights, bias)

    head = [read_dense(dims[i], dims[i + 1]) for i in range(len(dims) - 1)]
    gamma = beta = None
    d = config.feature_dim
    if config.norm.affine:
        gamma = r.get_f32_array(d)
        beta = r.get_f32_array(d)
    classifier = [read_dense(d, d), read_dense(d, 2)]
    params = NetworkParams(head=head, classifier=classifier, gamma=gamma, beta=beta)

    meta_len = r.unpack("I")
    raw_meta = r.take(meta_len)
    r.expect_end()
    metadata = json.loads(raw_meta.decode("utf-8")) if meta_len else None
    return config, params, metadata


def write_network_file(path, config, params, metadata=None):
    with open(path, "wb") as fh:
        fh.write(network_to_bytes(config, params, metadata))


def read_network_file(path):
    with open(path, "rb") as fh:
        data = fh.read()
    return network_from_bytes(data, source=str(path))


def peek_magic(path):
    with open(path, "rb") as fh:
        return fh.read(4)
