"""Folder-per-class feature export and manifest verification."""

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .backbones import (DEFAULT_TAP, build_backbone, extract_batch,
                        preprocessing, preprocessing_description, tap_width)
from .ocfv import HEADER, MAGIC, VERSION, OcfvError, read_ocfv, write_ocfv

IMAGE_SUFFIXES = {".jpg", ".jpeg", ".png", ".bmp", ".gif", ".tiff", ".webp"}


class ExportError(RuntimeError):
    """Export cannot proceed (no classes, empty class, bad weights...)."""


@dataclass
class ExportSpec:
    """What to export: image tree, backbone, tap point, output directory.

    image_root holds one subfolder per class.  weights is "pretrained",
    "random", or "file:PATH"; random initialization is seeded so repeated
    exports are byte-identical.
    """

    image_root: Path
    out_dir: Path
    backbone: str = "alexnet"
    tap: str = DEFAULT_TAP
    weights: str = "pretrained"
    seed: int = 0
    batch_size: int = 16

    def __post_init__(self):
        self.image_root = Path(self.image_root)
        self.out_dir = Path(self.out_dir)


@dataclass
class ClassReport:
    name: str
    exported: int
    skipped: int


@dataclass
class ExportReport:
    manifest_path: Path
    dim: int
    classes: list = field(default_factory=list)


def _image_files(folder):
    return sorted(p for p in folder.iterdir()
                  if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)


def _load_images(paths, transform):
    """Decode and preprocess; returns (tensors, decoded paths, skipped)."""
    tensors, kept, skipped = [], [], []
    for path in paths:
        try:
            with Image.open(path) as img:
                tensors.append(transform(img.convert("RGB")))
            kept.append(path)
        except Exception as exc:  # undecodable image: skip, keep counting
            warnings.warn(f"skipping undecodable image {path}: {exc}",
                          stacklevel=2)
            skipped.append(path)
    return tensors, kept, skipped


def export(spec):
    """Run the frozen backbone over every class folder; returns ExportReport.

    One OCFV file per class subfolder (row count = decodable images, in
    sorted filename order), plus a manifest.json listing every class with
    the shared dimensionality and export provenance.
    """
    class_dirs = sorted(d for d in spec.image_root.iterdir() if d.is_dir())
    if not class_dirs:
        raise ExportError(f"no class subfolders under {spec.image_root}")

    try:
        model = build_backbone(spec.backbone, spec.weights, spec.seed)
    except Exception as exc:
        raise ExportError(f"cannot obtain backbone weights: {exc}") from exc
    dim = tap_width(model, spec.backbone, spec.tap)
    transform = preprocessing()

    spec.out_dir.mkdir(parents=True, exist_ok=True)
    report = ExportReport(manifest_path=spec.out_dir / "manifest.json", dim=dim)
    entries = {}
    for class_dir in class_dirs:
        tensors, kept, skipped = _load_images(_image_files(class_dir), transform)
        if not tensors:
            raise ExportError(
                f"class {class_dir.name!r}: no decodable images "
                f"({len(skipped)} skipped)")
        rows = []
        for start in range(0, len(tensors), spec.batch_size):
            batch = torch.stack(tensors[start:start + spec.batch_size])
            rows.append(extract_batch(model, spec.backbone, spec.tap, batch))
        features = np.vstack(rows)
        if not np.isfinite(features).all():
            raise ExportError(f"class {class_dir.name!r}: non-finite features")
        filename = f"{class_dir.name}.ocfv"
        write_ocfv(spec.out_dir / filename, features)
        entries[class_dir.name] = filename
        report.classes.append(ClassReport(name=class_dir.name,
                                          exported=len(kept),
                                          skipped=len(skipped)))

    manifest = {
        "dim": dim,
        "classes": dict(sorted(entries.items())),
        "format": "ocfv",
        "exporter": {
            "backbone": spec.backbone,
            "tap": spec.tap,
            "weights": spec.weights,
            "seed": spec.seed,
            "preprocessing": preprocessing_description(),
        },
    }
    tmp = report.manifest_path.with_suffix(".json.tmp")
    tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                   encoding="utf-8")
    tmp.replace(report.manifest_path)
    return report


@dataclass
class VerifyReport:
    checked: int = 0
    issues: list = field(default_factory=list)

    @property
    def clean(self):
        return not self.issues


def verify(manifest_path):
    """Re-open every file in a manifest and check magic, dims, and values."""
    manifest_path = Path(manifest_path)
    report = VerifyReport()
    try:
        doc = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        report.issues.append(f"{manifest_path}: unreadable manifest: {exc}")
        return report

    dim = doc.get("dim")
    for name, rel in sorted(doc.get("classes", {}).items()):
        path = manifest_path.parent / rel
        report.checked += 1
        try:
            data = read_ocfv(path)
        except (OSError, OcfvError) as exc:
            report.issues.append(str(exc))
            continue
        if data.shape[1] != dim:
            report.issues.append(
                f"{path}: dimension {data.shape[1]} != manifest dim {dim}")
        if not np.isfinite(data).all():
            report.issues.append(f"{path}: non-finite values")
    return report
