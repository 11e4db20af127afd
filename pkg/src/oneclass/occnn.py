"""One-class CNN-style training on precomputed features.

The trainable part is a fully-connected extractor head plus a softmax
classifier.  The missing negative class is faked with pseudo-negatives
drawn from N(mu*1, sigma^2*I) in the head's output (feature) space; each
mini-batch of K target rows is concatenated with K noise rows, instance
normalization is applied to the concatenated batch, and the classifier is
trained with binary cross-entropy to tell the two apart.
"""

from dataclasses import asdict, dataclass

import numpy as np

from . import nn
from .base import BaseEstimator
from .exceptions import DivergenceError, InputError, ParameterError, ShapeError
from .numerics import RngState, gaussian_sample, shuffle_rows
from .serialize import read_network_file, write_network_file
from .validation import as_matrix, check_fitted

RESAMPLE_POLICIES = ("batch", "epoch", "once")


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters; defaults follow the published recipe
    (sigma=0.01, mu=0, Adam lr=1e-4, batch of 64 target rows)."""

    sigma: float = 0.01
    mu: float = 0.0
    lr: float = 1e-4
    batch_size: int = 64
    epochs: int = 30
    seed: int = 0
    resample: str = "batch"
    clamp: float = nn.PROB_CLAMP

    def __post_init__(self):
        if self.sigma < 0:
            raise ParameterError(f"sigma must be >= 0, got {self.sigma}")
        if self.batch_size < 1:
            raise ParameterError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise ParameterError(f"epochs must be >= 1, got {self.epochs}")
        if self.resample not in RESAMPLE_POLICIES:
            raise ParameterError(
                f"resample must be one of {RESAMPLE_POLICIES}, got {self.resample!r}"
            )


def generate_pseudo_negatives(rng, k, d, cfg):
    """k rows from N(mu*1, sigma^2*I): d independent 1-D Gaussians per row."""
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    return gaussian_sample(rng, k, d, cfg.mu, cfg.sigma)


def assemble_batch(real, pseudo):
    """Stack K real rows on K pseudo-negative rows; label 1=target, 0=noise."""
    real = as_matrix(real, "real")
    pseudo = as_matrix(pseudo, "pseudo")
    if real.shape != pseudo.shape:
        raise InputError(
            f"real {real.shape} and pseudo {pseudo.shape} batches must match"
        )
    batch = np.vstack([real, pseudo])
    labels = np.concatenate([np.ones(real.shape[0]), np.zeros(pseudo.shape[0])])
    return batch, labels


def train(features, cfg, net_cfg):
    """Train head + classifier end to end; returns (params, loss_history).

    Per epoch the target rows are reshuffled and walked in slices of
    batch_size; each slice gets an equal count of pseudo-negatives (fresh
    per batch/epoch/once according to cfg.resample), so class balance is
    exact even on the last partial slice.  loss_history holds the
    row-weighted mean loss of each epoch.
    """
    x = as_matrix(features, "features")
    if x.shape[1] != net_cfg.input_dim:
        raise ShapeError(
            f"features have {x.shape[1]} columns, network expects {net_cfg.input_dim}"
        )
    n, k = x.shape[0], cfg.batch_size
    d = net_cfg.feature_dim

    root = RngState(cfg.seed)
    train_rng = root.substream("train")
    params = nn.init_params(net_cfg, root.substream("init"))
    adam = nn.AdamState.for_arrays(params.arrays(), lr=cfg.lr)

    fixed_pool = None
    if cfg.resample == "once":
        fixed_pool = generate_pseudo_negatives(train_rng, n, d, cfg)

    history = []
    for epoch in range(cfg.epochs):
        shuffled, _ = shuffle_rows(train_rng, x)
        pool = fixed_pool
        if cfg.resample == "epoch":
            pool = generate_pseudo_negatives(train_rng, n, d, cfg)

        loss_sum = 0.0
        rows = 0
        for batch_index, start in enumerate(range(0, n, k)):
            xb = shuffled[start:start + k]
            kb = xb.shape[0]
            if pool is not None:
                noise = pool[start:start + kb]
            else:
                noise = generate_pseudo_negatives(train_rng, kb, d, cfg)

            h, head_cache = nn.head_forward(net_cfg, params, xb)
            if not np.isfinite(h).all():
                raise DivergenceError(
                    f"non-finite activations at epoch {epoch}, batch {batch_index}"
                )
            batch, labels = assemble_batch(h, noise)
            _, probs, tail_cache = nn.tail_forward(net_cfg, params, batch)
            loss = nn.bce_loss(probs, labels, cfg.clamp)
            if not np.isfinite(loss):
                raise DivergenceError(
                    f"non-finite loss at epoch {epoch}, batch {batch_index}"
                )

            cls_grads, dgamma, dbeta, dh = nn.tail_backward(
                net_cfg, params, tail_cache, labels)
            head_grads = nn.head_backward(net_cfg, params, head_cache, dh[:kb])
            grads = nn.NetworkParams(head=head_grads, classifier=cls_grads,
                                     gamma=dgamma, beta=dbeta)
            arrays, adam = nn.adam_step(params.arrays(), grads.arrays(), adam)
            params = params.replace_arrays(arrays)

            loss_sum += loss * 2 * kb
            rows += 2 * kb
        history.append(loss_sum / rows)

    return params, np.asarray(history)


class OneClassCNN(BaseEstimator):
    """Discriminative one-class classifier trained against Gaussian noise.

    fit() learns the head and classifier from target-class rows only;
    score_samples() returns the softmax target-class probability (higher
    means more target-like); transform() exposes the learned feature
    representation (extractor head output after instance normalization),
    which downstream models such as a one-class SVM can consume.
    """

    def __init__(self, feature_dim=None, head_hidden_dims=None,
                 classifier_activation="relu", instance_norm_eps=1e-5,
                 affine=False, sigma=0.01, mu=0.0, lr=1e-4, batch_size=64,
                 epochs=30, seed=0, resample="batch"):
        self.feature_dim = feature_dim
        self.head_hidden_dims = head_hidden_dims
        self.classifier_activation = classifier_activation
        self.instance_norm_eps = instance_norm_eps
        self.affine = affine
        self.sigma = sigma
        self.mu = mu
        self.lr = lr
        self.batch_size = batch_size
        self.epochs = epochs
        self.seed = seed
        self.resample = resample

    def _network_config(self, input_dim):
        feature_dim = self.feature_dim if self.feature_dim is not None else input_dim
        if self.head_hidden_dims is not None:
            hidden = tuple(self.head_hidden_dims)
        else:
            hidden = (feature_dim,)  # two head layers: D_in -> D -> D
        return nn.NetworkConfig(
            input_dim=input_dim,
            feature_dim=feature_dim,
            head_hidden_dims=hidden,
            classifier_activation=self.classifier_activation,
            norm=nn.InstanceNormSpec(epsilon=self.instance_norm_eps,
                                     affine=self.affine),
        )

    def _train_config(self):
        return TrainConfig(sigma=self.sigma, mu=self.mu, lr=self.lr,
                           batch_size=self.batch_size, epochs=self.epochs,
                           seed=self.seed, resample=self.resample)

    def fit(self, X, y=None):
        """Learn from target-class rows only (y is ignored)."""
        X = as_matrix(X, "X")
        net_cfg = self._network_config(X.shape[1])
        cfg = self._train_config()
        self.params_, self.loss_history_ = train(X, cfg, net_cfg)
        self.network_config_ = net_cfg
        self.train_config_ = cfg
        return self

    def _check_input(self, X):
        check_fitted(self, "params_")
        X = as_matrix(X, "X")
        if X.shape[1] != self.network_config_.input_dim:
            raise ShapeError(
                f"X has {X.shape[1]} columns, model expects "
                f"{self.network_config_.input_dim}"
            )
        return X

    def transform(self, X):
        """Learned representation: head output after instance normalization."""
        X = self._check_input(X)
        h, _ = nn.head_forward(self.network_config_, self.params_, X)
        features, _, _ = nn.tail_forward(self.network_config_, self.params_, h)
        return features

    def _classifier_probs(self, features):
        """Classifier on already-normalized feature rows."""
        fc1, fc2 = self.params_.classifier
        z1 = features @ fc1.weights + fc1.bias
        a1 = np.maximum(z1, 0.0) \
            if self.network_config_.classifier_activation == "relu" else z1
        logits = a1 @ fc2.weights + fc2.bias
        shifted = logits - logits.max(axis=1, keepdims=True)
        e = np.exp(shifted)
        return e / e.sum(axis=1, keepdims=True)

    def score_samples(self, X):
        """Target-class probability per row, in [0, 1].

        Exactly the classifier applied to transform(X).
        """
        return self._classifier_probs(self.transform(X))[:, nn.TARGET_COLUMN]

    # alias so the benchmark grid can treat every method uniformly
    decision_function = score_samples

    def score_feature_vectors(self, Z):
        """Score rows already living in feature space (the noise channel):
        instance norm then classifier, bypassing the head."""
        check_fitted(self, "params_")
        Z = as_matrix(Z, "Z")
        _, probs, _ = nn.tail_forward(self.network_config_, self.params_, Z)
        return probs[:, nn.TARGET_COLUMN]

    @property
    def final_loss_(self):
        check_fitted(self, "params_")
        return float(self.loss_history_[-1]) if self.loss_history_ is not None \
            else self._loaded_final_loss

    def save(self, path):
        """Write the model file: network container plus a training
        provenance metadata block."""
        check_fitted(self, "params_")
        meta = asdict(self.train_config_)
        meta["final_loss"] = float(self.loss_history_[-1]) \
            if self.loss_history_ is not None else self._loaded_final_loss
        write_network_file(path, self.network_config_, self.params_, meta)

    @classmethod
    def load(cls, path):
        """Rebuild a fitted model from save(); loss history is not stored."""
        config, params, meta = read_network_file(path)
        meta = meta or {}
        est = cls(
            feature_dim=config.feature_dim,
            head_hidden_dims=config.head_hidden_dims,
            classifier_activation=config.classifier_activation,
            instance_norm_eps=config.norm.epsilon,
            affine=config.norm.affine,
            sigma=meta.get("sigma", 0.01),
            mu=meta.get("mu", 0.0),
            lr=meta.get("lr", 1e-4),
            batch_size=meta.get("batch_size", 64),
            epochs=meta.get("epochs", 30),
            seed=meta.get("seed", 0),
            resample=meta.get("resample", "batch"),
        )
        est.network_config_ = config
        est.params_ = params
        est.loss_history_ = None
        est._loaded_final_loss = meta.get("final_loss")
        est.train_config_ = TrainConfig(
            sigma=est.sigma, mu=est.mu, lr=est.lr, batch_size=est.batch_size,
            epochs=est.epochs, seed=est.seed, resample=est.resample,
            clamp=meta.get("clamp", nn.PROB_CLAMP))
        return est
