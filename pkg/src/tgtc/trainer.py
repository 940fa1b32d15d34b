"""Full-batch transductive training: Adam with per-group learning rates,
validation-based early stopping, and reproducible checkpoint persistence.

All randomness (weight init, dropout) derives from the config seed, so a
fixed config yields bit-identical histories and checkpoints.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import metrics
from .corpus import CorpusBundle, corpus_hash
from .errors import (
    DegenerateSplitError,
    NonFiniteGradientError,
    NotNormalizedError,
    ParseError,
    VersionError,
)
from .graph import HeteroGraph, graph_hash
from .model import ModelParams, forward, init_params, loss_and_grads

CHECKPOINT_FORMAT_VERSION = 1
HISTORY_HEADER = "epoch,train_loss,val_accuracy,val_weighted_f1"


@dataclass
class TrainConfig:
    epochs: int = 50
    lr_gcn: float = 1e-3
    lr_head: float = 1e-3
    lam: float = 0.2
    hidden: int = 200
    dropout: float = 0.0
    patience: int = 10
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def validate(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        # Zero rates are allowed for diagnostics (frozen-parameter runs).
        if self.lr_gcn < 0 or self.lr_head < 0:
            raise ValueError("learning rates must be non-negative")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lambda must lie in [0, 1]")
        if self.hidden < 1:
            raise ValueError("hidden dim must be at least 1")
        if self.patience < 1:
            raise ValueError("patience must be at least 1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(**d)


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_accuracy: float
    val_weighted_f1: float


@dataclass
class TrainHistory:
    records: list[EpochRecord] = field(default_factory=list)

    def to_csv(self) -> str:
        lines = [HISTORY_HEADER]
        for r in self.records:
            lines.append(f"{r.epoch},{r.train_loss!r},{r.val_accuracy!r},{r.val_weighted_f1!r}")
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_csv())

    @classmethod
    def from_csv(cls, path) -> "TrainHistory":
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        if not lines or lines[0] != HISTORY_HEADER:
            raise ParseError(f"bad history header in {path}")
        records = []
        for line in lines[1:]:
            epoch, loss, acc, wf1 = line.split(",")
            records.append(EpochRecord(int(epoch), float(loss), float(acc), float(wf1)))
        return cls(records)


@dataclass
class Checkpoint:
    params: ModelParams        # best-validation model (the selected one)
    final_params: ModelParams  # model after the last executed epoch
    config: TrainConfig
    epochs_run: int
    best_epoch: int
    best_val_weighted_f1: float
    corpus_hash: str
    graph_hash: str
    version: int = CHECKPOINT_FORMAT_VERSION


class AdamState:
    def __init__(self, params: dict[str, np.ndarray]):
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0


def adam_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
    lrs: dict[str, float],
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> tuple[dict[str, np.ndarray], AdamState]:
    """One bias-corrected Adam update, in place, with per-group rates."""
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradientError(f"gradient for {name} is not finite")
    state.t += 1
    for name, p in params.items():
        g = grads[name]
        state.m[name] = beta1 * state.m[name] + (1.0 - beta1) * g
        state.v[name] = beta2 * state.v[name] + (1.0 - beta2) * g * g
        m_hat = state.m[name] / (1.0 - beta1 ** state.t)
        v_hat = state.v[name] / (1.0 - beta2 ** state.t)
        p -= lrs[name] * m_hat / (np.sqrt(v_hat) + eps)
    return params, state


def train(
    graph: HeteroGraph,
    x: np.ndarray,
    bundle: CorpusBundle,
    config: TrainConfig,
) -> tuple[Checkpoint, TrainHistory]:
    """Full-batch epochs over the whole-corpus graph; loss on train nodes
    only, model selection by validation weighted F1 (ties keep the earlier
    epoch), early stop after ``patience`` epochs without improvement."""
    config.validate()
    if not graph.normalized:
        raise NotNormalizedError("train requires the normalized adjacency")
    labels = bundle.labels_array()
    train_idx = bundle.split_indices("train")
    val_idx = bundle.split_indices("val")
    if train_idx.size == 0 or val_idx.size == 0:
        raise DegenerateSplitError("train and validation splits must be non-empty")
    if np.any(labels[train_idx] < 0) or np.any(labels[val_idx] < 0):
        raise DegenerateSplitError("train and validation documents must be labeled")
    n_class = bundle.n_class
    if n_class < 2:
        raise DegenerateSplitError("need at least two classes")

    rng = np.random.default_rng(config.seed)
    params = init_params(x.shape[1], config.hidden, n_class, config.lam, rng)
    pdict = {"w_head": params.w_head, "w0": params.w0, "w1": params.w1}
    lrs = {"w_head": config.lr_head, "w0": config.lr_gcn, "w1": config.lr_gcn}
    state = AdamState(pdict)

    history = TrainHistory()
    best_wf1 = -1.0
    best_params = params.copy()
    best_epoch = 0
    epochs_without_improvement = 0
    epoch = 0
    for epoch in range(1, config.epochs + 1):
        loss, grads = loss_and_grads(
            x, graph, params, labels, train_idx, dropout=config.dropout, rng=rng
        )
        adam_step(pdict, grads, state, lrs, config.beta1, config.beta2, config.eps)
        out = forward(x, graph, params)
        pred = np.argmax(out.z_final, axis=1)
        report = metrics.evaluate(pred, out.z_final, labels, val_idx)
        history.records.append(
            EpochRecord(epoch, loss, report.accuracy, report.weighted_f1)
        )
        if report.weighted_f1 > best_wf1:
            best_wf1 = report.weighted_f1
            best_params = params.copy()
            best_epoch = epoch
            epochs_without_improvement = 0
        else:
            epochs_without_improvement += 1
        if epochs_without_improvement >= config.patience:
            break

    checkpoint = Checkpoint(
        params=best_params,
        final_params=params.copy(),
        config=config,
        epochs_run=epoch,
        best_epoch=best_epoch,
        best_val_weighted_f1=best_wf1,
        corpus_hash=corpus_hash(bundle),
        graph_hash=graph_hash(graph),
    )
    return checkpoint, history


def _format_matrix(a: np.ndarray) -> str:
    # Decimal literals with 17 significant digits round-trip float64 exactly.
    return "[" + ",".join(
        "[" + ",".join(format(v, ".17g") for v in row) + "]" for row in a
    ) + "]"


def save_checkpoint(ckpt: Checkpoint, path) -> None:
    meta = {
        "format_version": ckpt.version,
        "config": ckpt.config.to_dict(),
        "epochs_run": ckpt.epochs_run,
        "best_epoch": ckpt.best_epoch,
        "best_val_weighted_f1": ckpt.best_val_weighted_f1,
        "corpus_hash": ckpt.corpus_hash,
        "graph_hash": ckpt.graph_hash,
        "lambda": ckpt.params.lam,
    }
    def weight_group(params: ModelParams) -> str:
        return (
            '{"w_head": ' + _format_matrix(params.w_head)
            + ', "w0": ' + _format_matrix(params.w0)
            + ', "w1": ' + _format_matrix(params.w1)
            + "}"
        )

    text = (
        '{"meta": ' + json.dumps(meta, sort_keys=True)
        + ', "weights": ' + weight_group(ckpt.params)
        + ', "final_weights": ' + weight_group(ckpt.final_params)
        + "}\n"
    )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def load_checkpoint(path, corpus_hash: str | None = None, graph_hash: str | None = None) -> Checkpoint:
    """Load a checkpoint; mismatched corpus/graph hashes only raise a warning."""
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"unreadable checkpoint: {exc}") from exc
    meta = obj.get("meta")
    if not isinstance(meta, dict) or meta.get("format_version") != CHECKPOINT_FORMAT_VERSION:
        raise VersionError("unsupported or missing checkpoint format version")
    def weight_group(key: str) -> ModelParams:
        weights = obj.get(key)
        if not isinstance(weights, dict):
            raise VersionError(f"checkpoint has no {key} section")
        return ModelParams(
            np.array(weights["w_head"], dtype=np.float64),
            np.array(weights["w0"], dtype=np.float64),
            np.array(weights["w1"], dtype=np.float64),
            float(meta["lambda"]),
        )

    ckpt = Checkpoint(
        params=weight_group("weights"),
        final_params=weight_group("final_weights"),
        config=TrainConfig.from_dict(meta["config"]),
        epochs_run=int(meta["epochs_run"]),
        best_epoch=int(meta["best_epoch"]),
        best_val_weighted_f1=float(meta["best_val_weighted_f1"]),
        corpus_hash=meta["corpus_hash"],
        graph_hash=meta["graph_hash"],
    )
    if corpus_hash is not None and corpus_hash != ckpt.corpus_hash:
        warnings.warn("checkpoint was trained on a different corpus", stacklevel=2)
    if graph_hash is not None and graph_hash != ckpt.graph_hash:
        warnings.warn("checkpoint was trained on a different graph", stacklevel=2)
    return ckpt
