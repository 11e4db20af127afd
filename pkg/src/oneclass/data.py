"""Feature files, dataset manifests, and the FeatureSet container.

Two on-disk formats carry feature matrices:

* CSV: one sample per line, comma-separated decimal reals, no header.
* OCFV binary: magic "OCFV", u16 version=1, u32 n, u32 d, then n*d f32
  little-endian row-major.  f32 matches typical backbone exports; the
  in-memory core widens to f64, and round trips are bit-exact.

A manifest is a JSON document mapping class names to feature files:
{"dim": D, "classes": {"name": "path", ...}, "format": "ocfv|csv"}.
Relative paths are resolved against the manifest's directory.
"""

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import FormatError, InputError, ParameterError, ParseError
from .serialize import ByteReader

FEATURE_MAGIC = b"OCFV"
FEATURE_VERSION = 1


@dataclass
class FeatureSet:
    """An n x d matrix of feature vectors plus provenance."""

    data: np.ndarray
    source: str = ""

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, order="C", copy=True)
        if arr.ndim != 2:
            raise InputError(f"feature data must be 2-D, got ndim={arr.ndim}")
        if not np.isfinite(arr).all():
            raise InputError(f"feature data contains non-finite entries ({self.source})")
        self.data = arr

    @property
    def n(self):
        return self.data.shape[0]

    @property
    def d(self):
        return self.data.shape[1]

    def take(self, indices, source=None):
        """Row subset as a new FeatureSet."""
        return FeatureSet(self.data[np.asarray(indices, dtype=int)],
                          source=source if source is not None else self.source)


def _load_csv(path):
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if width is None:
                width = len(fields)
            elif len(fields) != width:
                raise FormatError(
                    f"{path}: line {lineno} has {len(fields)} values, "
                    f"expected {width}"
                )
            try:
                rows.append([float(f) for f in fields])
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno}: {exc}") from exc
    if not rows:
        return np.empty((0, 0))
    return np.asarray(rows, dtype=np.float64)


def _save_csv(fs, path):
    with open(path, "w", encoding="utf-8") as fh:
        for row in fs.data:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def _load_binary(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    r = ByteReader(raw, source=str(path))
    r.expect_magic(FEATURE_MAGIC)
    version = r.unpack("H")
    if version != FEATURE_VERSION:
        raise ParseError(f"{path}: unsupported version {version}")
    n = r.unpack("I")
    d = r.unpack("I")
    data = r.get_f32_array(n * d).reshape(n, d)
    r.expect_end()
    return data


def _save_binary(fs, path):
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sHII", FEATURE_MAGIC, FEATURE_VERSION, fs.n, fs.d))
        fh.write(np.ascontiguousarray(fs.data, dtype="<f4").tobytes())


def infer_format(path):
    return "csv" if str(path).endswith(".csv") else "binary"


def load_feature_file(path, format=None):
    """Load a feature file; format is "csv", "binary", or None to infer.

    Raises ParseError (with line or byte position) on malformed content
    and FormatError on ragged CSV rows.
    """
    fmt = format or infer_format(path)
    if fmt == "csv":
        data = _load_csv(path)
    elif fmt == "binary":
        data = _load_binary(path)
    else:
        raise ParameterError(f"unknown feature format {fmt!r}")
    arr = np.asarray(data)
    if not np.isfinite(arr).all():
        raise ParseError(f"{path}: non-finite feature values")
    return FeatureSet(arr, source=str(path))


def save_feature_file(fs, path, format=None, overwrite=True):
    """Write a FeatureSet to disk (inverse of load_feature_file)."""
    fmt = format or infer_format(path)
    if not overwrite and Path(path).exists():
        raise FileExistsError(f"{path} exists and overwrite=False")
    if fmt == "csv":
        _save_csv(fs, path)
    elif fmt == "binary":
        _save_binary(fs, path)
    else:
        raise ParameterError(f"unknown feature format {fmt!r}")


@dataclass
class DatasetManifest:
    """Named classes mapped to feature files sharing one dimensionality."""

    dim: int
    classes: dict
    format: str = "ocfv"
    base_dir: Path = field(default_factory=Path)

    def path_for(self, name):
        try:
            rel = self.classes[name]
        except KeyError:
            raise InputError(f"class {name!r} not in manifest "
                             f"(have: {sorted(self.classes)})") from None
        return self.base_dir / rel

    def load_class(self, name):
        fs = load_feature_file(self.path_for(name),
                               "csv" if self.format == "csv" else "binary")
        if fs.d != self.dim and fs.n > 0:
            raise FormatError(
                f"{self.path_for(name)}: dimension {fs.d} != manifest dim {self.dim}"
            )
        return fs

    def load_all(self):
        """All classes, keyed by name, in sorted-name order."""
        return {name: self.load_class(name) for name in sorted(self.classes)}


def load_manifest(path):
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    for key in ("dim", "classes", "format"):
        if key not in doc:
            raise FormatError(f"{path}: manifest missing key {key!r}")
    if doc["format"] not in ("ocfv", "csv"):
        raise FormatError(f"{path}: unknown format {doc['format']!r}")
    return DatasetManifest(dim=int(doc["dim"]), classes=dict(doc["classes"]),
                           format=doc["format"], base_dir=path.parent)


def save_manifest(manifest, path):
    doc = {"dim": manifest.dim, "classes": dict(sorted(manifest.classes.items())),
           "format": manifest.format}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")
