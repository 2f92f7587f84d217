"""Pure numpy implementation of the hot chain kernels.

Same contract as the compiled module: ReLU network forward pass, mean
surrogate loss with analytic backpropagation, and the Langevin parameter
update. Loss kinds are selected by integer code (0 = bounded binary
cross-entropy, 1 = savage). Gradients come back as one flat vector in the
packing order weights-then-bias, layer by layer.
"""

import numpy as np

KIND_BBCE = 0
KIND_SAVAGE = 1


def _sigmoid(v):
    out = np.empty_like(v)
    pos = v >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-v[pos]))
    ev = np.exp(v[~pos])
    out[~pos] = ev / (1.0 + ev)
    return out


def _softplus(v):
    # log(1 + exp(v)), stable on both tails
    return np.where(v > 0, v, 0.0) + np.log1p(np.exp(-np.abs(v)))


def loss_terms(margins, kind, p_min):
    """Per-example loss and d(loss)/d(margin) for the given surrogate."""
    if kind == KIND_BBCE:
        cap = -np.log(p_min)
        raw = _softplus(-margins)
        loss = np.minimum(raw, cap) / cap
        dphi = np.where(raw < cap, -_sigmoid(-margins) / cap, 0.0)
    elif kind == KIND_SAVAGE:
        s = _sigmoid(-2.0 * margins)
        loss = s * s
        dphi = -4.0 * _sigmoid(2.0 * margins) * s * s
    else:
        raise ValueError(f"unknown loss kind {kind}")
    return loss, dphi


def forward_scores(X, weights, biases):
    """Scalar network output per row: ReLU hidden layers, linear output."""
    A = X
    for W, b in zip(weights[:-1], biases[:-1]):
        A = np.maximum(A @ W + b, 0.0)
    return np.asarray(A @ weights[-1] + biases[-1]).ravel()


def evaluate(X, y, weights, biases, kind, p_min, theta):
    """Mean surrogate loss and 0-1 error rate over the full batch."""
    scores = forward_scores(X, weights, biases)
    margins = scores * y
    loss, _ = loss_terms(margins, kind, p_min)
    return float(loss.mean()), float(np.mean(margins < theta))


def _backward(X, y, weights, biases, kind, p_min, theta, want_eval):
    n = X.shape[0]
    activations = [X]
    A = X
    for W, b in zip(weights[:-1], biases[:-1]):
        A = np.maximum(A @ W + b, 0.0)
        activations.append(A)
    scores = np.asarray(A @ weights[-1] + biases[-1]).ravel()
    margins = scores * y
    loss, dphi = loss_terms(margins, kind, p_min)
    mean_loss = float(loss.mean())
    zero_one = float(np.mean(margins < theta)) if want_eval else None

    delta = (dphi * y / n)[:, None]
    pieces = [None] * len(weights)
    for layer in range(len(weights) - 1, -1, -1):
        A_prev = activations[layer]
        pieces[layer] = (A_prev.T @ delta, delta.sum(axis=0))
        if layer > 0:
            # ReLU subgradient: 0 at the kink, matching A_prev > 0
            delta = (delta @ weights[layer].T) * (A_prev > 0)
    grad = np.concatenate([np.concatenate((gw.ravel(), gb)) for gw, gb in pieces])
    return mean_loss, zero_one, grad


def loss_and_grad(X, y, weights, biases, kind, p_min):
    """Mean surrogate loss and its exact flat gradient."""
    mean_loss, _, grad = _backward(X, y, weights, biases, kind, p_min, 0.0, False)
    return mean_loss, grad


def evaluate_with_grad(X, y, weights, biases, kind, p_min, theta):
    """Fused full-batch evaluation and gradient, one forward pass."""
    return _backward(X, y, weights, biases, kind, p_min, theta, True)


def langevin_update(h, grad, eta, decay, noise_scale, xi):
    """One step of h <- (1 - decay) h - eta grad + noise_scale xi."""
    return (1.0 - decay) * h - eta * grad + noise_scale * xi
