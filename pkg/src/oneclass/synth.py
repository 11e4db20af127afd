"""Synthetic per-class datasets for desk-scale verification.

Three families:

* blobs: isotropic Gaussian clusters on scaled basis directions, the
  easy sanity-check case.
* ring: annuli of different radii embedded in the first two coordinates.
* manifold: one-dimensional sine-warped curves embedded in high
  dimension with isotropic noise.  Classes share the same ambient region
  and differ in curve orientation/phase, which is the regime where
  global/linear decision rules degrade and a learned representation pays
  off.
"""

import numpy as np

from .data import FeatureSet
from .exceptions import ParameterError
from .numerics import gaussian_sample

KINDS = ("blobs", "ring", "manifold")


def _class_names(n_classes):
    return [f"class{c:02d}" for c in range(n_classes)]


def _orthonormal_frame(rng, dim, k):
    """k orthonormal directions in R^dim from a seeded Gaussian draw."""
    g = rng.standard_normal(dim * k).reshape(dim, k)
    q, r = np.linalg.qr(g)
    # fix signs so the frame is a deterministic function of the draw
    return q * np.sign(np.diag(r))


def synth_blobs(rng, n_classes=2, n_per_class=100, dim=8, separation=10.0,
                sigma=1.0):
    if n_classes > dim:
        raise ParameterError(
            f"blobs needs n_classes <= dim, got {n_classes} > {dim}")
    scale = separation / np.sqrt(2.0)  # pairwise center distance = separation
    out = {}
    for c, name in enumerate(_class_names(n_classes)):
        sub = rng.substream(f"blobs:{name}")
        center = np.zeros(dim)
        center[c] = scale
        x = center + gaussian_sample(sub, n_per_class, dim, 0.0, sigma)
        out[name] = FeatureSet(x, source=f"synth:blobs:{name}")
    return out


def synth_ring(rng, n_classes=2, n_per_class=100, dim=8, radius=5.0,
               gap=2.5, thickness=0.25, noise=0.1):
    if dim < 2:
        raise ParameterError(f"ring needs dim >= 2, got {dim}")
    out = {}
    for c, name in enumerate(_class_names(n_classes)):
        sub = rng.substream(f"ring:{name}")
        theta = 2.0 * np.pi * sub.uniform(n_per_class)
        r = radius + c * gap + thickness * sub.standard_normal(n_per_class)
        x = noise * sub.standard_normal(n_per_class * dim).reshape(n_per_class, dim)
        x[:, 0] += r * np.cos(theta)
        x[:, 1] += r * np.sin(theta)
        out[name] = FeatureSet(x, source=f"synth:ring:{name}")
    return out


def synth_manifold(rng, n_classes=2, n_per_class=100, dim=16, extent=15.0,
                   amplitude=3.0, waves=3.0, noise=0.2, center_spread=0.0):
    """Sine-warped lines sharing one long axis.

    Every class runs along the same (dataset-level random) direction and
    carries most of its variance there; classes differ in the directions
    and phases of their sinusoidal warps.  Global distance scales are
    therefore nearly class-blind, which is what defeats raw-feature
    kernel/linear rules while leaving structure for a learned
    representation to pick up.
    """
    if dim < 3:
        raise ParameterError(f"manifold needs dim >= 3, got {dim}")
    axis = _orthonormal_frame(rng.substream("manifold:axis"), dim, 1)[:, 0]
    out = {}
    for name in _class_names(n_classes):
        sub = rng.substream(f"manifold:{name}")
        raw = sub.standard_normal(dim * 2).reshape(dim, 2)
        raw -= np.outer(axis, axis @ raw)  # warp lives orthogonal to the axis
        q, r = np.linalg.qr(raw)
        warp = q * np.sign(np.diag(r))
        phase = 2.0 * np.pi * sub.uniform(2)
        offset = center_spread * sub.standard_normal(dim)
        t = 2.0 * sub.uniform(n_per_class) - 1.0
        curve = (np.outer(extent * t, axis)
                 + np.outer(amplitude * np.sin(np.pi * waves * t + phase[0]),
                            warp[:, 0])
                 + np.outer(amplitude * np.cos(np.pi * (waves + 1.0) * t + phase[1]),
                            warp[:, 1]))
        x = offset + curve + noise * sub.standard_normal(
            n_per_class * dim).reshape(n_per_class, dim)
        out[name] = FeatureSet(x, source=f"synth:manifold:{name}")
    return out


_GENERATORS = {"blobs": synth_blobs, "ring": synth_ring, "manifold": synth_manifold}


def synth_dataset(kind, rng, **params):
    """Generate per-class FeatureSets; kind is blobs, ring, or manifold."""
    if kind not in _GENERATORS:
        raise ParameterError(f"kind must be one of {KINDS}, got {kind!r}")
    try:
        return _GENERATORS[kind](rng, **params)
    except TypeError as exc:
        raise ParameterError(f"invalid parameters for {kind}: {exc}") from exc
