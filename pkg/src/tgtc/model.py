"""Composite classifier: a linear head over document embeddings, a two-layer
GCN over the corpus graph, and a convex interpolation of their softmax
outputs, with hand-derived gradients for all three weight matrices.

Logits are computed for document rows only; word rows are zero-initialized
and never enter the loss or the metrics. The interpolation weight is a fixed
hyperparameter, never trained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotNormalizedError
from .graph import HeteroGraph
from .linalg import NLL_EPS, masked_nll, relu, row_softmax, spmm


@dataclass
class ModelParams:
    w_head: np.ndarray  # dim x n_class
    w0: np.ndarray      # dim x hidden
    w1: np.ndarray      # hidden x n_class
    lam: float          # interpolation weight in [0, 1]

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam}")
        if self.w_head.shape[0] != self.w0.shape[0]:
            raise ValueError("head and first GCN layer disagree on input dim")
        if self.w0.shape[1] != self.w1.shape[0]:
            raise ValueError("GCN layers disagree on hidden dim")
        if self.w_head.shape[1] != self.w1.shape[1]:
            raise ValueError("head and GCN disagree on class count")
        for name in ("w_head", "w0", "w1"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} contains non-finite values")

    @property
    def dim(self) -> int:
        return self.w_head.shape[0]

    @property
    def hidden(self) -> int:
        return self.w0.shape[1]

    @property
    def n_class(self) -> int:
        return self.w_head.shape[1]

    def copy(self) -> "ModelParams":
        return ModelParams(self.w_head.copy(), self.w0.copy(), self.w1.copy(), self.lam)


@dataclass
class ForwardOutputs:
    z_b: np.ndarray      # head probabilities, n_doc x n_class
    z_g: np.ndarray      # GCN probabilities, n_doc x n_class
    z_final: np.ndarray  # lam * z_g + (1 - lam) * z_b


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_params(dim: int, hidden: int, n_class: int, lam: float, rng: np.random.Generator) -> ModelParams:
    # Draw order (head, then the two GCN layers) is fixed: single-path
    # reference models rely on the head weights being the first draw.
    w_head = glorot_uniform(rng, dim, n_class)
    w0 = glorot_uniform(rng, dim, hidden)
    w1 = glorot_uniform(rng, hidden, n_class)
    return ModelParams(w_head, w0, w1, lam)


def build_feature_matrix(emb, n_word: int) -> np.ndarray:
    """Stack document embeddings above an all-zero word block."""
    values = np.asarray(emb.values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise ValueError("embedding matrix contains non-finite values")
    return np.vstack([values, np.zeros((n_word, values.shape[1]))])


def _dropout_mask(rng: np.random.Generator, shape, rate: float) -> np.ndarray:
    # Inverted dropout: surviving entries are rescaled so expectations match.
    return (rng.random(shape) >= rate) / (1.0 - rate)


def _forward_full(
    x: np.ndarray,
    graph: HeteroGraph,
    params: ModelParams,
    dropout: float = 0.0,
    rng: np.random.Generator | None = None,
) -> dict:
    if not graph.normalized:
        raise NotNormalizedError("forward pass requires the normalized adjacency")
    n_doc = graph.n_doc
    if dropout > 0.0:
        if rng is None:
            raise ValueError("dropout requires a random generator")
        x_used = x * _dropout_mask(rng, x.shape, dropout)
    else:
        x_used = x
    logits_b = x_used[:n_doc] @ params.w_head
    z_b = row_softmax(logits_b)

    ax = spmm(graph.adjacency, x_used)
    pre = ax @ params.w0
    h = relu(pre)
    if dropout > 0.0:
        h_mask = _dropout_mask(rng, h.shape, dropout)
        h_used = h * h_mask
    else:
        h_mask = None
        h_used = h
    ah = spmm(graph.adjacency, h_used)
    logits_g = ah[:n_doc] @ params.w1
    z_g = row_softmax(logits_g)

    z_final = params.lam * z_g + (1.0 - params.lam) * z_b
    return {
        "x_used": x_used, "ax": ax, "pre": pre, "h_mask": h_mask, "ah": ah,
        "z_b": z_b, "z_g": z_g, "z_final": z_final,
    }


def forward(
    x: np.ndarray,
    graph: HeteroGraph,
    params: ModelParams,
    dropout: float = 0.0,
    rng: np.random.Generator | None = None,
) -> ForwardOutputs:
    state = _forward_full(x, graph, params, dropout, rng)
    return ForwardOutputs(state["z_b"], state["z_g"], state["z_final"])


def _softmax_backward(s: np.ndarray, grad: np.ndarray) -> np.ndarray:
    return s * (grad - (grad * s).sum(axis=1, keepdims=True))


def loss_and_grads(
    x: np.ndarray,
    graph: HeteroGraph,
    params: ModelParams,
    labels: np.ndarray,
    mask,
    dropout: float = 0.0,
    rng: np.random.Generator | None = None,
) -> tuple[float, dict[str, np.ndarray]]:
    """Masked NLL over the interpolated probabilities and its exact analytic
    gradients for w_head, w0, and w1. ``mask`` must hold unique indices of
    labeled document nodes."""
    state = _forward_full(x, graph, params, dropout, rng)
    z_final = state["z_final"]
    mask = np.asarray(mask, dtype=np.intp)
    labels = np.asarray(labels)
    loss = masked_nll(z_final, labels, mask)

    n_doc = graph.n_doc
    m = mask.size
    y = labels[mask]
    grad_p = np.zeros_like(z_final)
    picked = z_final[mask, y]
    unclamped = picked > NLL_EPS  # clamped entries have zero derivative
    grad_p[mask[unclamped], y[unclamped]] = -1.0 / (m * picked[unclamped])

    # Head path.
    grad_logits_b = _softmax_backward(state["z_b"], (1.0 - params.lam) * grad_p)
    grad_w_head = state["x_used"][:n_doc].T @ grad_logits_b

    # GCN path; the adjacency is symmetric, so its transpose is itself.
    grad_logits_g = _softmax_backward(state["z_g"], params.lam * grad_p)
    grad_w1 = state["ah"][:n_doc].T @ grad_logits_g
    grad_ah = np.zeros((graph.n_nodes, params.hidden))
    grad_ah[:n_doc] = grad_logits_g @ params.w1.T
    grad_h = spmm(graph.adjacency, grad_ah)
    if state["h_mask"] is not None:
        grad_h = grad_h * state["h_mask"]
    grad_pre = grad_h * (state["pre"] > 0.0)
    grad_w0 = state["ax"].T @ grad_pre

    return loss, {"w_head": grad_w_head, "w0": grad_w0, "w1": grad_w1}
