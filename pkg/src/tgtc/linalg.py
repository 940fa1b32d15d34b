"""Dense/sparse numerical kernels with exact, test-pinned contracts.

Everything runs in 64-bit floats. All kernels are pure functions of their
inputs and deterministic: identical inputs give bit-identical outputs.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .errors import EmptyMaskError, ShapeError

NLL_EPS = 1e-12


def spmm(s: sp.spmatrix, m: np.ndarray) -> np.ndarray:
    """Sparse @ dense product with shape validation."""
    if s.shape[1] != m.shape[0]:
        raise ShapeError(f"cannot multiply {s.shape} by {m.shape}")
    return np.asarray(s @ m)


def row_softmax(m: np.ndarray) -> np.ndarray:
    """Numerically stabilized softmax over each row."""
    z = m - m.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def relu(m: np.ndarray) -> np.ndarray:
    return np.maximum(m, 0.0)


def masked_nll(p: np.ndarray, labels: np.ndarray, mask, eps: float = NLL_EPS) -> float:
    """Mean negative log-likelihood of the true class over the masked rows.

    Rows of ``p`` must already be probability distributions; the picked
    probabilities are clamped at ``eps`` before the log.
    """
    mask = np.asarray(mask, dtype=np.intp)
    if mask.size == 0:
        raise EmptyMaskError("loss mask selects no nodes")
    rows = p[mask]
    if not np.all(np.abs(rows.sum(axis=1) - 1.0) < 1e-6):
        raise ValueError("rows of p must sum to 1 within 1e-6")
    picked = rows[np.arange(mask.size), np.asarray(labels)[mask]]
    return float(-np.mean(np.log(np.maximum(picked, eps))))


def grad_check(f, params: list[np.ndarray], grads: list[np.ndarray], h: float = 1e-5) -> float:
    """Compare analytic gradients against central finite differences.

    ``f(params)`` must return the scalar being differentiated; ``grads``
    holds the analytic gradient for each array in ``params``. Returns the
    maximum over all coordinates of |g_a - g_n| / max(1e-8, |g_a| + |g_n|).
    """
    worst = 0.0
    for p, g in zip(params, grads):
        flat_p = p.reshape(-1)
        flat_g = g.reshape(-1)
        for i in range(flat_p.size):
            orig = flat_p[i]
            flat_p[i] = orig + h
            f_plus = f(params)
            flat_p[i] = orig - h
            f_minus = f(params)
            flat_p[i] = orig
            g_num = (f_plus - f_minus) / (2.0 * h)
            g_ana = flat_g[i]
            err = abs(g_ana - g_num) / max(1e-8, abs(g_ana) + abs(g_num))
            worst = max(worst, err)
    return worst
