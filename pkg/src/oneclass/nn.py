"""Minimal dense-network stack with exact backpropagation and Adam.

The pipeline it expresses: an extractor head of fully-connected ReLU
layers, per-sample instance normalization, then a two-layer classifier
ending in a 2-way softmax.  Column 1 of the softmax output is the
target-class probability.  Everything is float64 and purely functional:
forward/backward/adam_step never mutate their inputs.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import ParameterError, ShapeError, UsageError
from .validation import as_matrix, check_binary_labels

PROB_CLAMP = 1e-12
TARGET_COLUMN = 1  # softmax column holding the target-class probability


@dataclass
class Dense:
    weights: np.ndarray  # (in_dim, out_dim)
    bias: np.ndarray     # (out_dim,)


@dataclass(frozen=True)
class InstanceNormSpec:
    """Per-sample standardization across feature channels.

    epsilon guards zero-variance rows; affine adds learnable per-channel
    scale/shift after standardization.
    """
    epsilon: float = 1e-5
    affine: bool = False

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ParameterError(f"epsilon must be > 0, got {self.epsilon}")


@dataclass(frozen=True)
class NetworkConfig:
    """Shape of the network: head widths, feature width, classifier options.

    The head maps input_dim through head_hidden_dims to feature_dim with a
    ReLU after every layer.  The classifier is fixed at feature_dim ->
    feature_dim -> 2; its first layer optionally gets a ReLU.
    """
    input_dim: int
    feature_dim: int
    head_hidden_dims: tuple = ()
    classifier_activation: str = "relu"  # "relu" | "none"
    norm: InstanceNormSpec = field(default_factory=InstanceNormSpec)

    def __post_init__(self):
        if self.input_dim < 1:
            raise ParameterError(f"input_dim must be >= 1, got {self.input_dim}")
        if self.feature_dim < 2:
            raise ParameterError(
                f"feature_dim must be >= 2 (instance norm over a single "
                f"channel is degenerate), got {self.feature_dim}"
            )
        if any(d < 1 for d in self.head_hidden_dims):
            raise ParameterError(f"hidden dims must be >= 1: {self.head_hidden_dims}")
        if self.classifier_activation not in ("relu", "none"):
            raise ParameterError(
                f"classifier_activation must be 'relu' or 'none', "
                f"got {self.classifier_activation!r}"
            )
        object.__setattr__(self, "head_hidden_dims", tuple(self.head_hidden_dims))

    @property
    def head_dims(self):
        """Layer widths of the head including input: (D_in, ..., D)."""
        return (self.input_dim, *self.head_hidden_dims, self.feature_dim)


@dataclass
class NetworkParams:
    head: list        # Dense layers, input_dim -> ... -> feature_dim
    classifier: list  # [Dense(D, D), Dense(D, 2)]
    gamma: np.ndarray | None = None  # instance-norm scale, affine only
    beta: np.ndarray | None = None   # instance-norm shift, affine only

    def arrays(self):
        """All trainable arrays in canonical (pipeline) order."""
        out = []
        for layer in self.head:
            out += [layer.weights, layer.bias]
        if self.gamma is not None:
            out += [self.gamma, self.beta]
        for layer in self.classifier:
            out += [layer.weights, layer.bias]
        return out

    def replace_arrays(self, arrays):
        """Rebuild a params object of identical structure from new arrays."""
        arrays = list(arrays)
        expected = len(self.arrays())
        if len(arrays) != expected:
            raise UsageError(f"expected {expected} arrays, got {len(arrays)}")
        it = iter(arrays)
        head = [Dense(next(it), next(it)) for _ in self.head]
        gamma = beta = None
        if self.gamma is not None:
            gamma, beta = next(it), next(it)
        classifier = [Dense(next(it), next(it)) for _ in self.classifier]
        return NetworkParams(head=head, classifier=classifier, gamma=gamma, beta=beta)


def init_params(config, rng):
    """Glorot-uniform weights, zero biases (unit scale / zero shift if affine).

    Draw order is canonical layer order, so a fixed seed fixes every entry.
    """
    def glorot(fan_in, fan_out):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        u = rng.uniform(fan_in * fan_out).reshape(fan_in, fan_out)
        return Dense((2.0 * u - 1.0) * limit, np.zeros(fan_out))

    dims = config.head_dims
    head = [glorot(dims[i], dims[i + 1]) for i in range(len(dims) - 1)]
    d = config.feature_dim
    classifier = [glorot(d, d), glorot(d, 2)]
    gamma = beta = None
    if config.norm.affine:
        gamma, beta = np.ones(d), np.zeros(d)
    return NetworkParams(head=head, classifier=classifier, gamma=gamma, beta=beta)


def zero_params(config):
    """All-zero parameters; useful as the symmetric (uninformative) model."""
    dims = config.head_dims
    head = [Dense(np.zeros((dims[i], dims[i + 1])), np.zeros(dims[i + 1]))
            for i in range(len(dims) - 1)]
    d = config.feature_dim
    classifier = [Dense(np.zeros((d, d)), np.zeros(d)), Dense(np.zeros((d, 2)), np.zeros(2))]
    gamma = beta = None
    if config.norm.affine:
        gamma, beta = np.ones(d), np.zeros(d)
    return NetworkParams(head=head, classifier=classifier, gamma=gamma, beta=beta)


# ---------------------------------------------------------------------------
# forward pieces


def instance_norm(x, spec, gamma=None, beta=None):
    """Standardize each row to zero mean / unit variance across channels.

    Uses the population (1/D) variance.  Rows with zero variance map to
    zeros thanks to epsilon.  Requires D >= 2.
    """
    x = as_matrix(x, "x")
    if x.shape[1] < 2:
        raise ParameterError(
            f"instance norm needs >= 2 channels, got {x.shape[1]}"
        )
    mean = x.mean(axis=1, keepdims=True)
    var = x.var(axis=1, keepdims=True)
    y = (x - mean) / np.sqrt(var + spec.epsilon)
    if gamma is not None:
        y = y * gamma + beta
    return y


def _relu(z):
    return np.maximum(z, 0.0)


def _softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


@dataclass
class HeadCache:
    x: np.ndarray
    pre_activations: list  # z per head layer
    output: np.ndarray     # relu(z_last)


@dataclass
class TailCache:
    h: np.ndarray           # tail input (head output, possibly with noise rows)
    normalized: np.ndarray  # standardized rows before affine
    inv_std: np.ndarray     # per-row 1/sqrt(var + eps)
    features: np.ndarray    # after affine (== normalized when affine off)
    z1: np.ndarray
    a1: np.ndarray
    probs: np.ndarray


def head_forward(config, params, x):
    """Run the extractor head; x is (n, input_dim)."""
    x = as_matrix(x, "x")
    if x.shape[1] != config.input_dim:
        raise ShapeError(
            f"input has {x.shape[1]} columns, network expects {config.input_dim}"
        )
    pre = []
    h = x
    for layer in params.head:
        z = h @ layer.weights + layer.bias
        pre.append(z)
        h = _relu(z)
    return h, HeadCache(x=x, pre_activations=pre, output=h)


def tail_forward(config, params, h):
    """Instance norm then classifier; h is (n, feature_dim)."""
    h = as_matrix(h, "h")
    if h.shape[1] != config.feature_dim:
        raise ShapeError(
            f"tail input has {h.shape[1]} columns, expected {config.feature_dim}"
        )
    mean = h.mean(axis=1, keepdims=True)
    var = h.var(axis=1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + config.norm.epsilon)
    normalized = (h - mean) * inv_std
    features = normalized
    if params.gamma is not None:
        features = normalized * params.gamma + params.beta

    fc1, fc2 = params.classifier
    z1 = features @ fc1.weights + fc1.bias
    a1 = _relu(z1) if config.classifier_activation == "relu" else z1
    logits = a1 @ fc2.weights + fc2.bias
    probs = _softmax(logits)
    cache = TailCache(h=h, normalized=normalized, inv_std=inv_std,
                      features=features, z1=z1, a1=a1, probs=probs)
    return features, probs, cache


def forward(config, params, x):
    """Full pipeline on real inputs: returns (features, probs, cache).

    features is the classifier's input representation (after instance
    norm); probs rows are valid 2-way distributions.
    """
    h, head_cache = head_forward(config, params, x)
    features, probs, tail_cache = tail_forward(config, params, h)
    return features, probs, (head_cache, tail_cache)


# ---------------------------------------------------------------------------
# loss and backward


def bce_loss(probs, labels, clamp=PROB_CLAMP):
    """Mean binary cross-entropy on the target-class probability.

    labels: 1 for target-class rows, 0 for pseudo-negative rows.  The
    probability is clamped to [clamp, 1-clamp] before the logs.
    """
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 2 or probs.shape[1] != 2:
        raise ShapeError(f"probs must be (n, 2), got {probs.shape}")
    y = check_binary_labels(labels, probs.shape[0])
    p = np.clip(probs[:, TARGET_COLUMN], clamp, 1.0 - clamp)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def tail_backward(config, params, cache, labels):
    """Gradients of the mean BCE loss for the tail; also d(loss)/d(tail input).

    Returns (classifier grads as [Dense, Dense], gamma grad, beta grad, dh).
    """
    if not isinstance(cache, TailCache):
        raise UsageError("tail_backward needs the cache from tail_forward")
    n = cache.probs.shape[0]
    y = check_binary_labels(labels, n)
    fc1, fc2 = params.classifier
    if cache.features.shape[1] != fc1.weights.shape[0]:
        raise UsageError("cache does not match network parameters")

    # softmax + cross-entropy collapse: d(loss)/d(logits) = (p - onehot)/n
    onehot = np.column_stack([1.0 - y, y])
    dlogits = (cache.probs - onehot) / n

    d_fc2 = Dense(cache.a1.T @ dlogits, dlogits.sum(axis=0))
    da1 = dlogits @ fc2.weights.T
    dz1 = da1 * (cache.z1 > 0) if config.classifier_activation == "relu" else da1
    d_fc1 = Dense(cache.features.T @ dz1, dz1.sum(axis=0))
    dfeat = dz1 @ fc1.weights.T

    dgamma = dbeta = None
    dnorm = dfeat
    if params.gamma is not None:
        dgamma = (dfeat * cache.normalized).sum(axis=0)
        dbeta = dfeat.sum(axis=0)
        dnorm = dfeat * params.gamma

    # instance-norm jacobian couples channels within each row
    row_mean = dnorm.mean(axis=1, keepdims=True)
    proj = (dnorm * cache.normalized).mean(axis=1, keepdims=True)
    dh = cache.inv_std * (dnorm - row_mean - cache.normalized * proj)
    return [d_fc1, d_fc2], dgamma, dbeta, dh


def head_backward(config, params, cache, dh):
    """Backpropagate dh (n, feature_dim) through the head; returns [Dense...]."""
    if not isinstance(cache, HeadCache):
        raise UsageError("head_backward needs the cache from head_forward")
    if dh.shape != cache.output.shape:
        raise UsageError(
            f"upstream gradient shape {dh.shape} does not match "
            f"head output {cache.output.shape}"
        )
    grads = [None] * len(params.head)
    grad = dh
    for i in range(len(params.head) - 1, -1, -1):
        layer = params.head[i]
        z = cache.pre_activations[i]
        dz = grad * (z > 0)
        below = cache.x if i == 0 else _relu(cache.pre_activations[i - 1])
        grads[i] = Dense(below.T @ dz, dz.sum(axis=0))
        grad = dz @ layer.weights.T
    return grads


def backward(config, params, cache, labels):
    """Exact gradients of bce_loss(forward(x), labels) for all parameters."""
    try:
        head_cache, tail_cache = cache
    except (TypeError, ValueError) as exc:
        raise UsageError("backward needs the cache returned by forward") from exc
    cls_grads, dgamma, dbeta, dh = tail_backward(config, params, tail_cache, labels)
    head_grads = head_backward(config, params, head_cache, dh)
    return NetworkParams(head=head_grads, classifier=cls_grads,
                         gamma=dgamma, beta=dbeta)


# ---------------------------------------------------------------------------
# Adam


@dataclass(frozen=True)
class AdamState:
    """First/second moment accumulators plus the step counter.

    Shapes mirror the parameter arrays.  t counts completed steps and is
    incremented before each update (bias correction uses the new t).
    """
    m: tuple
    v: tuple
    t: int = 0
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_arrays(cls, arrays, lr=1e-4):
        return cls(m=tuple(np.zeros_like(a) for a in arrays),
                   v=tuple(np.zeros_like(a) for a in arrays),
                   t=0, lr=lr)


def adam_step(arrays, grads, state):
    """One bias-corrected Adam update; returns (new arrays, new state).

    Pure: identical inputs give bit-identical outputs.
    """
    arrays, grads = list(arrays), list(grads)
    if len(arrays) != len(grads) or len(arrays) != len(state.m):
        raise UsageError("parameter/gradient/state array counts disagree")
    for a, g in zip(arrays, grads):
        if a.shape != g.shape:
            raise UsageError(f"gradient shape {g.shape} != parameter shape {a.shape}")

    t = state.t + 1
    c1 = 1.0 - state.beta1 ** t
    c2 = 1.0 - state.beta2 ** t
    new_arrays, new_m, new_v = [], [], []
    for a, g, m, v in zip(arrays, grads, state.m, state.v):
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * (g * g)
        update = state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
        new_arrays.append(a - update)
        new_m.append(m)
        new_v.append(v)
    return new_arrays, replace(state, m=tuple(new_m), v=tuple(new_v), t=t)
