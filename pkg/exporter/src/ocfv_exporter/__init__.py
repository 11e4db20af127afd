"""Offline image-feature exporter.

Runs a frozen image-classification backbone with its final classification
layer removed over a folder-per-class image tree and writes one OCFV
feature file per class plus a JSON manifest, the input format of the
one-class classification toolkit.
"""

from .backbones import BACKBONES, build_backbone, tap_width
from .export import ExportError, ExportSpec, VerifyReport, export, verify
from .ocfv import read_ocfv, write_ocfv

__version__ = "0.1.0"

__all__ = [
    "BACKBONES", "ExportError", "ExportSpec", "VerifyReport",
    "build_backbone", "export", "read_ocfv", "tap_width", "verify",
    "write_ocfv",
]
