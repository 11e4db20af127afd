"""Deterministic dense linear algebra and seeded random sampling.

All other modules draw their randomness from :class:`RngState` so that a
single 64-bit seed reproduces every artifact bit-for-bit.  Normal variates
come from a Box-Muller transform of counter-based uniform draws; the draw
count per sample is fixed (no rejection), so streams are stable.
"""

import zlib

import numpy as np
from scipy.linalg import solve_triangular

from .exceptions import NumericalError, ParameterError, ShapeError
from .validation import as_matrix, as_vector

_TWO_PI = 2.0 * np.pi


class RngState:
    """Explicitly owned random stream seeded by a 64-bit integer.

    Wraps a Philox counter-based generator.  Identical (seed, stream key)
    pairs produce identical draw sequences; ``substream`` derives an
    independent child stream from a name, so adding a consumer never
    perturbs the draws of existing ones.  Instances are single-owner and
    must not be shared across threads.
    """

    def __init__(self, seed, _spawn_key=()):
        seed = int(seed)
        if seed < 0 or seed >= 2**64:
            raise ParameterError(f"seed must be in [0, 2^64), got {seed}")
        self.seed = seed
        self._spawn_key = tuple(_spawn_key)
        seq = np.random.SeedSequence(entropy=seed, spawn_key=self._spawn_key)
        self._gen = np.random.Generator(np.random.Philox(seq))

    def substream(self, name):
        """Derive an independent stream keyed by ``name`` (deterministic)."""
        key = zlib.crc32(str(name).encode("utf-8"))
        return RngState(self.seed, self._spawn_key + (key,))

    def uniform(self, n):
        """n i.i.d. draws from U[0, 1)."""
        return self._gen.random(int(n))

    def standard_normal(self, n):
        """n i.i.d. N(0, 1) draws via Box-Muller (exactly 2*ceil(n/2) uniforms)."""
        n = int(n)
        if n == 0:
            return np.empty(0)
        pairs = (n + 1) // 2
        u1 = 1.0 - self._gen.random(pairs)  # (0, 1]: keeps log finite
        u2 = self._gen.random(pairs)
        radius = np.sqrt(-2.0 * np.log(u1))
        z = np.concatenate([radius * np.cos(_TWO_PI * u2),
                            radius * np.sin(_TWO_PI * u2)])
        return z[:n]

    def permutation(self, n):
        """A random permutation of range(n)."""
        return self._gen.permutation(int(n))

    def choice_without_replacement(self, n, k):
        """First k indices of a random permutation of range(n)."""
        n, k = int(n), int(k)
        if k > n:
            raise ParameterError(f"cannot draw {k} of {n} without replacement")
        return self._gen.permutation(n)[:k]


def matmul(a, b):
    """Matrix product with shape validation.

    Raises ShapeError when inner dimensions disagree.  Output is freshly
    allocated; inputs are never modified.
    """
    a = as_matrix(a, "a", allow_empty=True)
    b = as_matrix(b, "b", allow_empty=True)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(
            f"matmul inner dimensions disagree: {a.shape} x {b.shape}"
        )
    out = a @ b
    if not np.isfinite(out).all():
        raise NumericalError("matrix product overflowed to non-finite values")
    return out


def gaussian_sample(rng, n, d, mu, sigma):
    """n x d matrix of i.i.d. N(mu, sigma^2) entries.

    Each column is an independent one-dimensional Gaussian, so a row is a
    draw from N(mu*1, sigma^2*I).  sigma=0 degenerates to the constant mu.
    """
    n, d = int(n), int(d)
    if n < 1 or d < 1:
        raise ParameterError(f"sample shape must be positive, got ({n}, {d})")
    if sigma < 0:
        raise ParameterError(f"sigma must be >= 0, got {sigma}")
    z = rng.standard_normal(n * d).reshape(n, d)
    return mu + sigma * z


def shuffle_rows(rng, m):
    """Shuffle matrix rows; returns (shuffled copy, permutation).

    The permutation is returned so labels can be co-shuffled.
    """
    m = as_matrix(m, "m")
    perm = rng.permutation(m.shape[0])
    return m[perm].copy(), perm


def solve_spd(a, b):
    """Solve a x = b for symmetric positive definite a via Cholesky.

    The caller is responsible for regularizing near-singular systems.
    Raises NumericalError when the factorization fails (non-SPD input).
    """
    a = as_matrix(a, "a")
    b = as_vector(b, "b")
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"a must be square, got {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise ShapeError(f"b has length {b.shape[0]}, expected {a.shape[0]}")
    try:
        lower = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"matrix is not positive definite: {exc}") from exc
    y = solve_triangular(lower, b, lower=True)
    return solve_triangular(lower.T, y, lower=False)
