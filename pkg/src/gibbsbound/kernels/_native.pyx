# cython: boundscheck=False, wraparound=False, cdivision=True, nonecheck=False
"""Compiled implementation of the hot chain kernels.

Mirrors the numpy module's contract: ReLU network forward pass, mean
surrogate loss with analytic backpropagation, and the Langevin parameter
update. Matrix products go through BLAS dgemm; the bias, ReLU, loss and
masking passes are fused C loops, which is where this backend gains over
the numpy implementation. Loss kinds: 0 = bounded binary cross-entropy,
1 = savage.
"""

from libc.math cimport exp, log, log1p

from scipy.linalg.cython_blas cimport dgemm

import numpy as np

KIND_BBCE = 0
KIND_SAVAGE = 1

cdef int _BBCE = 0


cdef inline double _sigmoid(double v) noexcept nogil:
    cdef double e
    if v >= 0.0:
        return 1.0 / (1.0 + exp(-v))
    e = exp(v)
    return e / (1.0 + e)


cdef inline double _softplus(double v) noexcept nogil:
    # log(1 + exp(v)), stable on both tails
    if v > 0.0:
        return v + log1p(exp(-v))
    return log1p(exp(v))


cdef void _matmul_rowmajor(const double* A, const double* B, double* C,
                           int n, int k, int m, double beta) noexcept nogil:
    """C (n x m, row-major) <- A (n x k) @ B (k x m) + beta * C via Fortran dgemm."""
    cdef char trans = b'N'
    cdef double one = 1.0
    dgemm(&trans, &trans, &m, &n, &k, &one, <double*>B, &m, <double*>A, &k, &beta, C, &m)


cdef void _matmul_at_b(const double* A, const double* B, double* C,
                       int n, int k, int m) noexcept nogil:
    """C (k x m, row-major) <- A (n x k)^T @ B (n x m)."""
    cdef char tn = b'N'
    cdef char tt = b'T'
    cdef double one = 1.0
    cdef double zero = 0.0
    dgemm(&tn, &tt, &m, &k, &n, &one, <double*>B, &m, <double*>A, &k, &zero, C, &m)


cdef void _matmul_a_bt(const double* A, const double* B, double* C,
                       int n, int k, int m) noexcept nogil:
    """C (n x m, row-major) <- A (n x k) @ B (m x k)^T."""
    cdef char tn = b'N'
    cdef char tt = b'T'
    cdef double one = 1.0
    cdef double zero = 0.0
    dgemm(&tt, &tn, &m, &n, &k, &one, <double*>B, &k, <double*>A, &k, &zero, C, &m)


cdef void _bias_fill(double* out, const double* b, Py_ssize_t n, Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t i, j
    for i in range(n):
        for j in range(m):
            out[i * m + j] = b[j]


cdef void _relu_inplace(double* Z, Py_ssize_t size) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(size):
        if Z[i] < 0.0:
            Z[i] = 0.0


def _forward(X, list weights, list biases):
    """All layer activations (input first) plus the flat score vector."""
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t layer, n_layers = len(weights)
    acts = [X]
    cdef const double[:, ::1] cur
    cdef const double[:, ::1] wv
    cdef double[:, ::1] z
    cdef const double[::1] bv
    for layer in range(n_layers):
        out = np.empty((n, weights[layer].shape[1]))
        cur = acts[layer]
        z = out
        bv = biases[layer]
        wv = weights[layer]
        with nogil:
            _bias_fill(&z[0, 0], &bv[0], n, z.shape[1])
            _matmul_rowmajor(&cur[0, 0], &wv[0, 0], &z[0, 0],
                             <int>n, <int>cur.shape[1], <int>z.shape[1], 1.0)
            if layer < n_layers - 1:
                _relu_inplace(&z[0, 0], n * z.shape[1])
        acts.append(out)
    return acts, acts[n_layers].ravel()


cdef double _loss_pass(const double[::1] scores, const double[::1] y, int kind,
                       double p_min, double theta, double* zero_one,
                       double[::1] dphi, bint want_grad) noexcept nogil:
    """Mean loss; fills the 0-1 rate and, on request, dloss/dmargin."""
    cdef Py_ssize_t n = scores.shape[0]
    cdef Py_ssize_t i
    cdef double cap = -log(p_min)
    cdef double v, raw, s, loss_sum = 0.0
    cdef double wrong = 0.0
    for i in range(n):
        v = scores[i] * y[i]
        if v < theta:
            wrong += 1.0
        if kind == _BBCE:
            raw = _softplus(-v)
            loss_sum += (raw if raw < cap else cap) / cap
            if want_grad:
                dphi[i] = -_sigmoid(-v) / cap if raw < cap else 0.0
        else:
            s = _sigmoid(-2.0 * v)
            loss_sum += s * s
            if want_grad:
                dphi[i] = -4.0 * _sigmoid(2.0 * v) * s * s
    zero_one[0] = wrong / n
    return loss_sum / n


cdef void _mask_inplace(double* delta, const double* A, Py_ssize_t size) noexcept nogil:
    # ReLU subgradient: zero wherever the activation was clamped
    cdef Py_ssize_t i
    for i in range(size):
        if A[i] <= 0.0:
            delta[i] = 0.0


cdef void _scale_delta(double* delta, const double* dphi, const double* y,
                       Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(n):
        delta[i] = dphi[i] * y[i] / n


cdef void _col_sums(const double* delta, double* gb, Py_ssize_t n, Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t i, j
    for j in range(m):
        gb[j] = 0.0
    for i in range(n):
        for j in range(m):
            gb[j] += delta[i * m + j]


def _backward(X, y, weights, biases, int kind, double p_min, double theta):
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    weights = list(weights)
    biases = list(biases)
    acts, scores = _forward(X, weights, biases)

    cdef Py_ssize_t n = X.shape[0]
    cdef double zero_one = 0.0
    dphi = np.empty(n)
    cdef double mean_loss = _loss_pass(scores, y, kind, p_min, theta, &zero_one, dphi, True)

    sizes = [W.shape[0] * W.shape[1] + W.shape[1] for W in weights]
    grad = np.empty(int(sum(sizes)))
    offsets = np.concatenate(([0], np.cumsum(sizes)))

    delta = np.empty((n, 1))
    cdef double[:, ::1] deltav = delta
    cdef const double[::1] dpv = dphi
    cdef const double[::1] yv = y
    with nogil:
        _scale_delta(&deltav[0, 0], &dpv[0], &yv[0], n)
    cdef const double[:, ::1] dv
    cdef const double[:, ::1] av
    cdef const double[:, ::1] wv
    cdef double[:, ::1] gWv
    cdef double[:, ::1] nxtv
    cdef double[::1] gbv
    cdef Py_ssize_t layer, d_in, d_out
    for layer in range(len(weights) - 1, -1, -1):
        W = weights[layer]
        d_in, d_out = W.shape
        base = int(offsets[layer])
        gW = grad[base : base + d_in * d_out].reshape(d_in, d_out)
        gb = grad[base + d_in * d_out : base + d_in * d_out + d_out]
        dv = delta
        av = acts[layer]
        gWv = gW
        gbv = gb
        with nogil:
            _matmul_at_b(&av[0, 0], &dv[0, 0], &gWv[0, 0], <int>n, <int>d_in, <int>d_out)
            _col_sums(&dv[0, 0], &gbv[0], n, d_out)
        if layer > 0:
            nxt = np.empty((n, d_in))
            wv = W
            nxtv = nxt
            with nogil:
                _matmul_a_bt(&dv[0, 0], &wv[0, 0], &nxtv[0, 0], <int>n, <int>d_out, <int>d_in)
                _mask_inplace(&nxtv[0, 0], &av[0, 0], n * d_in)
            delta = nxt
    return mean_loss, zero_one, grad


def forward_scores(X, weights, biases):
    """Scalar network output per row: ReLU hidden layers, linear output."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    _, scores = _forward(X, list(weights), list(biases))
    return scores


def evaluate(X, y, weights, biases, int kind, double p_min, double theta):
    """Mean surrogate loss and 0-1 error rate over the full batch."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    _, scores = _forward(X, list(weights), list(biases))
    cdef double zero_one = 0.0
    dphi = np.empty(0)
    cdef double mean_loss = _loss_pass(scores, y, kind, p_min, theta, &zero_one, dphi, False)
    return mean_loss, zero_one


def loss_and_grad(X, y, weights, biases, int kind, double p_min):
    """Mean surrogate loss and its exact flat gradient."""
    mean_loss, _, grad = _backward(X, y, weights, biases, kind, p_min, 0.0)
    return mean_loss, grad


def evaluate_with_grad(X, y, weights, biases, int kind, double p_min, double theta):
    """Fused full-batch evaluation and gradient, one forward pass."""
    return _backward(X, y, weights, biases, kind, p_min, theta)


def langevin_update(h, grad, double eta, double decay, double noise_scale, xi):
    """One step of h <- (1 - decay) h - eta grad + noise_scale xi."""
    cdef const double[::1] hv = np.ascontiguousarray(h, dtype=np.float64)
    cdef const double[::1] gv = np.ascontiguousarray(grad, dtype=np.float64)
    cdef const double[::1] xv = np.ascontiguousarray(xi, dtype=np.float64)
    cdef Py_ssize_t d = hv.shape[0]
    out = np.empty(d)
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    cdef double keep = 1.0 - decay
    with nogil:
        for i in range(d):
            ov[i] = keep * hv[i] - eta * gv[i] + noise_scale * xv[i]
    return out
