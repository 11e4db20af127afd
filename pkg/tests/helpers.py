"""Shared test oracles: finite differences, brute-force QP, exact AUROC.

These stay independent of the implementation paths they check: the QP
oracle is plain projected gradient descent, the AUROC oracles use exact
rational arithmetic, and gradients are checked against central
differences on instances kept away from ReLU kinks and degenerate
instance-norm rows (where finite differences themselves break down).
"""

from fractions import Fraction

import numpy as np

from oneclass import nn
from oneclass.numerics import RngState, gaussian_sample


def floored_rel_err(a, b, floor=1e-3):
    """Relative error with a floor so near-zero entries compare absolutely."""
    return abs(a - b) / max(abs(a), abs(b), floor)


# ---------------------------------------------------------------------------
# gradient checking on the full training path (head + noise concat + tail)


def training_loss(cfg, params, x_real, noise, labels):
    h, _ = nn.head_forward(cfg, params, x_real)
    batch = np.vstack([h, noise])
    _, probs, _ = nn.tail_forward(cfg, params, batch)
    return nn.bce_loss(probs, labels)


def training_grads(cfg, params, x_real, noise, labels):
    h, head_cache = nn.head_forward(cfg, params, x_real)
    batch = np.vstack([h, noise])
    _, probs, tail_cache = nn.tail_forward(cfg, params, batch)
    cls_grads, dgamma, dbeta, dh = nn.tail_backward(cfg, params, tail_cache, labels)
    head_grads = nn.head_backward(cfg, params, head_cache, dh[:x_real.shape[0]])
    return nn.NetworkParams(head=head_grads, classifier=cls_grads,
                            gamma=dgamma, beta=dbeta)


def is_conditioned(cfg, params, x_real, noise, kink_margin=1e-3, var_floor=1e-2):
    """True when no ReLU pre-activation sits near its kink and no tail row
    is near zero variance; central differences are trustworthy there."""
    h, head_cache = nn.head_forward(cfg, params, x_real)
    for z in head_cache.pre_activations:
        if np.abs(z).min() < kink_margin:
            return False
    batch = np.vstack([h, noise])
    if batch.var(axis=1).min() < var_floor:
        return False
    _, _, tail_cache = nn.tail_forward(cfg, params, batch)
    if cfg.classifier_activation == "relu" and np.abs(tail_cache.z1).min() < kink_margin:
        return False
    return True


def random_gradcheck_instance(sub):
    """A random small network + batch drawn from the given substream."""
    u = sub.uniform(6)
    d_in = 2 + int(u[0] * 7)
    d = 2 + int(u[1] * 7)
    k = 1 + int(u[2] * 4)
    hidden = (2 + int(u[3] * 6),) if u[4] < 0.7 else ()
    affine = u[5] < 0.33
    activation = "none" if u[5] > 0.66 else "relu"
    cfg = nn.NetworkConfig(input_dim=d_in, feature_dim=d,
                           head_hidden_dims=hidden,
                           classifier_activation=activation,
                           norm=nn.InstanceNormSpec(affine=affine))
    params = nn.init_params(cfg, sub.substream("p"))
    if affine:
        params.gamma = params.gamma + 0.3 * sub.standard_normal(d)
        params.beta = params.beta + 0.3 * sub.standard_normal(d)
    x_real = gaussian_sample(sub.substream("x"), k, d_in, 0.7, 1.0)
    noise = gaussian_sample(sub.substream("n"), k, d, 0.0, 0.5)
    labels = np.concatenate([np.ones(k), np.zeros(k)])
    return cfg, params, x_real, noise, labels


def conditioned_instances(seed, count):
    """Yield `count` well-conditioned gradcheck instances, deterministically."""
    rng = RngState(seed)
    produced = 0
    attempt = 0
    while produced < count:
        attempt += 1
        cfg, params, x_real, noise, labels = random_gradcheck_instance(
            rng.substream(f"cfg{attempt}"))
        if not is_conditioned(cfg, params, x_real, noise):
            continue
        produced += 1
        yield cfg, params, x_real, noise, labels


def max_gradcheck_error(cfg, params, x_real, noise, labels, h=1e-6):
    """Worst floored relative error between analytic and central-difference
    gradients over every parameter entry."""
    grads = training_grads(cfg, params, x_real, noise, labels)
    worst = 0.0
    for arr, grad in zip(params.arrays(), grads.arrays()):
        flat_a, flat_g = arr.ravel(), grad.ravel()
        for j in range(flat_a.size):
            orig = flat_a[j]
            flat_a[j] = orig + h
            up = training_loss(cfg, params, x_real, noise, labels)
            flat_a[j] = orig - h
            down = training_loss(cfg, params, x_real, noise, labels)
            flat_a[j] = orig
            fd = (up - down) / (2.0 * h)
            worst = max(worst, floored_rel_err(fd, flat_g[j]))
    return worst


# ---------------------------------------------------------------------------
# brute-force QP oracle for the SVM duals


def project_box_simplex(v, C):
    """Exact Euclidean projection onto {0 <= a <= C, sum(a) = 1}.

    Solves sum(clip(v - tau, 0, C)) = 1 for tau.  The sum is piecewise
    linear and decreasing in tau with breakpoints at v_i and v_i - C, so
    the crossing segment is found by search and solved in closed form.
    """
    bps = np.sort(np.concatenate([v, v - C]))[::-1]  # tau decreasing
    totals = np.clip(v[None, :] - bps[:, None], 0.0, C).sum(axis=1)  # increasing
    k = int(np.searchsorted(totals, 1.0, side="left"))
    if k < bps.size and totals[k] == 1.0:
        tau = bps[k]
    else:
        # crossing lies strictly inside (bps[k], bps[k-1])
        mid = 0.5 * (bps[k] + bps[k - 1])
        active = (v - mid > 0.0) & (v - mid < C)
        n_above = int((v - mid >= C).sum())
        tau = (C * n_above + v[active].sum() - 1.0) / active.sum()
    return np.clip(v - tau, 0.0, C)


def projected_gradient_qp(Q, lin, C, iters=100000):
    """Minimize 1/2 a'Qa + lin'a over the box-simplex set, slowly but surely."""
    n = Q.shape[0]
    alpha = project_box_simplex(np.full(n, 1.0 / n), C)
    step = 1.0 / max(np.linalg.norm(Q, 2), 1e-12)
    for _ in range(iters):
        grad = Q @ alpha + lin
        alpha = project_box_simplex(alpha - step * grad, C)
    return alpha


def qp_objective(Q, lin, alpha):
    return 0.5 * alpha @ Q @ alpha + lin @ alpha


# ---------------------------------------------------------------------------
# exact AUROC oracles (rational arithmetic)


def auroc_pairs_fraction(target_scores, negative_scores):
    """Brute-force pair counting; ties count one half.  Exact."""
    wins = 0
    ties = 0
    for t in target_scores:
        for n in negative_scores:
            if t > n:
                wins += 1
            elif t == n:
                ties += 1
    return Fraction(2 * wins + ties,
                    2 * len(target_scores) * len(negative_scores))


def auroc_rank_fraction(target_scores, negative_scores):
    """Average-rank computation in exact arithmetic (mirrors the
    implementation's algorithm, independent of its float path)."""
    n_t, n_n = len(target_scores), len(negative_scores)
    tagged = [(s, 1) for s in target_scores] + [(s, 0) for s in negative_scores]
    tagged.sort(key=lambda p: p[0])
    double_rank_sum = 0  # 2 * sum of target ranks, always an integer
    i = 0
    while i < len(tagged):
        j = i
        while j < len(tagged) and tagged[j][0] == tagged[i][0]:
            j += 1
        # ranks i+1 .. j (1-based) share the average (i+1+j)/2
        double_avg = i + 1 + j
        for k in range(i, j):
            if tagged[k][1] == 1:
                double_rank_sum += double_avg
        i = j
    u2 = double_rank_sum - n_t * (n_t + 1)  # 2 * Mann-Whitney U
    return Fraction(u2, 2 * n_t * n_n)
