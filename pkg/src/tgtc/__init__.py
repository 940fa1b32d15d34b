"""Transductive text-graph classification over heterogeneous word-document
graphs: TF-IDF/PPMI graph construction, an embedding-initialized two-layer
GCN interpolated with a linear head, and evaluation tooling."""

from .corpus import (
    CorpusBundle,
    Document,
    EmbeddingMatrix,
    Vocab,
    assign_splits,
    build_vocab,
    fallback_embed,
    load_corpus,
    load_embeddings,
    tokenize,
    tokenize_documents,
    write_embeddings,
)
from .graph import (
    HeteroGraph,
    WindowCounts,
    assemble_adjacency,
    build_graph,
    compute_ppmi,
    compute_tf_idf,
    count_windows,
    load_graph,
    normalize_adjacency,
    save_graph,
)
from .metrics import EvalReport, evaluate, roc_auc, roc_points
from .model import (
    ForwardOutputs,
    ModelParams,
    build_feature_matrix,
    forward,
    init_params,
    loss_and_grads,
)
from .trainer import (
    Checkpoint,
    TrainConfig,
    TrainHistory,
    adam_step,
    load_checkpoint,
    save_checkpoint,
    train,
)

__version__ = "0.1.0"
