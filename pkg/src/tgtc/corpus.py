"""Corpus ingestion: JSONL loading, tokenization, vocabulary, transductive
splits, and document embeddings (interchange file or built-in fallback).

Document order in the input file is canonical: it fixes node order for graph
construction and row order for embedding matrices.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import (
    DegenerateSplitError,
    DuplicateIdError,
    EmptyCorpusError,
    EmptyVocabularyError,
    FormatError,
    InvalidDimError,
    MissingEmbeddingError,
    ParseError,
)

SPLITS = ("train", "val", "test", "unassigned")
DEFAULT_RATIOS = (0.7, 0.1, 0.3)  # train pool, val share of train pool, test

EMB_HEADER_TAG = "tgtc-emb"
EMB_FORMAT_VERSION = "v1"

# Unicode alphanumerics; underscore counts as a separator.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


@dataclass
class Document:
    id: str
    text: str
    label: int | None = None
    split: str = "unassigned"


@dataclass
class Vocab:
    """Token inventory with dense contiguous indices in first-occurrence order."""

    index: dict[str, int]
    df: np.ndarray    # number of documents containing each token
    freq: np.ndarray  # total occurrences of each token in the corpus

    def __len__(self) -> int:
        return len(self.index)


@dataclass
class CorpusBundle:
    documents: list[Document]
    tokens: list[list[str]] | None = None      # raw token strings per document
    vocab: Vocab | None = None
    tokenized: list[list[int]] | None = None   # vocab indices, min_df-filtered

    @property
    def n_doc(self) -> int:
        return len(self.documents)

    @property
    def n_class(self) -> int:
        labels = [d.label for d in self.documents if d.label is not None]
        return max(labels) + 1 if labels else 0

    def labels_array(self) -> np.ndarray:
        """Per-document labels with -1 for unlabeled documents."""
        return np.array(
            [d.label if d.label is not None else -1 for d in self.documents],
            dtype=np.intp,
        )

    def split_indices(self, split: str) -> np.ndarray:
        return np.array(
            [i for i, d in enumerate(self.documents) if d.split == split],
            dtype=np.intp,
        )


@dataclass
class EmbeddingMatrix:
    """Per-document embeddings; row order matches the bundle's document order."""

    values: np.ndarray
    provenance: str

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


def load_corpus(path) -> CorpusBundle:
    """Load a JSONL corpus (fields: id, text, optional label and split)."""
    documents: list[Document] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                raise ParseError("blank line", line=lineno)
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(str(exc), line=lineno) from exc
            if not isinstance(rec, dict) or "id" not in rec or "text" not in rec:
                raise ParseError("record must carry 'id' and 'text'", line=lineno)
            doc_id = rec["id"]
            if not isinstance(doc_id, str) or not doc_id:
                raise ParseError("'id' must be a non-empty string", line=lineno)
            if doc_id in seen:
                raise DuplicateIdError(doc_id)
            seen.add(doc_id)
            label = rec.get("label")
            if label is not None and (isinstance(label, bool) or not isinstance(label, int) or label < 0):
                raise ParseError("'label' must be a non-negative integer or null", line=lineno)
            split = rec.get("split") or "unassigned"
            if split not in SPLITS:
                raise ParseError(f"unknown split {split!r}", line=lineno)
            if split in ("train", "val") and label is None:
                raise ParseError(f"{split} document {doc_id!r} has no label", line=lineno)
            documents.append(Document(doc_id, str(rec["text"]), label, split))
    if not documents:
        raise EmptyCorpusError(str(path))
    return CorpusBundle(documents)


def tokenize(text: str, lowercase: bool = True) -> list[str]:
    """Split on non-alphanumeric characters, dropping empty tokens."""
    if lowercase:
        text = text.lower()
    return _TOKEN_RE.findall(text)


def tokenize_documents(bundle: CorpusBundle, lowercase: bool = True) -> CorpusBundle:
    bundle.tokens = [tokenize(d.text, lowercase) for d in bundle.documents]
    return bundle


def build_vocab(bundle: CorpusBundle, min_df: int = 1) -> Vocab:
    """Build the whole-corpus vocabulary (transductive: all splits included).

    Tokens with document frequency below ``min_df`` are dropped; surviving
    tokens get indices in first-occurrence order. Also fills
    ``bundle.tokenized`` with the filtered index sequences.
    """
    if bundle.tokens is None:
        raise ValueError("documents are not tokenized")
    df: dict[str, int] = {}
    freq: dict[str, int] = {}
    for toks in bundle.tokens:
        for t in set(toks):
            df[t] = df.get(t, 0) + 1
        for t in toks:
            freq[t] = freq.get(t, 0) + 1
    index: dict[str, int] = {}
    for toks in bundle.tokens:
        for t in toks:
            if t not in index and df[t] >= min_df:
                index[t] = len(index)
    if not index:
        raise EmptyVocabularyError(f"no token has document frequency >= {min_df}")
    df_arr = np.zeros(len(index), dtype=np.intp)
    freq_arr = np.zeros(len(index), dtype=np.intp)
    for t, i in index.items():
        df_arr[i] = df[t]
        freq_arr[i] = freq[t]
    vocab = Vocab(index, df_arr, freq_arr)
    bundle.vocab = vocab
    bundle.tokenized = [
        [index[t] for t in toks if t in index] for toks in bundle.tokens
    ]
    return vocab


def assign_splits(
    bundle: CorpusBundle,
    ratios: tuple[float, float, float] = DEFAULT_RATIOS,
    seed: int = 0,
) -> CorpusBundle:
    """Assign train/val/test splits to unassigned labeled documents.

    Documents that already carry a split are untouched. Counts use floor,
    with remainders going to train: first ``test`` is carved off the corpus,
    then the validation share is carved off the remaining train pool.
    """
    train_frac, val_frac, test_frac = ratios
    if abs(train_frac + test_frac - 1.0) > 1e-9 or not (0.0 <= val_frac < 1.0):
        raise ValueError(f"inconsistent split ratios {ratios}")
    candidates = [i for i, d in enumerate(bundle.documents) if d.split == "unassigned"]
    for i in candidates:
        if bundle.documents[i].label is None:
            raise DegenerateSplitError(
                f"unassigned document {bundle.documents[i].id!r} has no label"
            )
    if candidates:
        rng = np.random.default_rng(seed)
        order = [candidates[j] for j in rng.permutation(len(candidates))]
        n = len(order)
        n_test = math.floor(n * test_frac)
        pool = n - n_test
        n_val = math.floor(pool * val_frac)
        n_train = pool - n_val
        for i in order[:n_train]:
            bundle.documents[i].split = "train"
        for i in order[n_train : n_train + n_val]:
            bundle.documents[i].split = "val"
        for i in order[n_train + n_val :]:
            bundle.documents[i].split = "test"
    if bundle.split_indices("train").size == 0 or bundle.split_indices("val").size == 0:
        raise DegenerateSplitError("train or validation split is empty")
    return bundle


def fallback_embed(bundle: CorpusBundle, dim: int, seed: int = 0) -> EmbeddingMatrix:
    """Dependency-free document embeddings: L2-normalized TF-IDF rows pushed
    through a seeded Gaussian random projection with entries N(0, 1/dim).

    Deterministic given the seed; a document with no retained tokens maps to
    the zero vector.
    """
    if dim <= 0:
        raise InvalidDimError(f"dim must be positive, got {dim}")
    if bundle.vocab is None:
        raise ValueError("vocabulary is not built")
    from .graph import compute_tf_idf  # local import: graph depends on corpus types

    n_doc, n_word = bundle.n_doc, len(bundle.vocab)
    tfidf = compute_tf_idf(bundle)
    rows = np.fromiter((k[0] for k in tfidf), dtype=np.intp, count=len(tfidf))
    cols = np.fromiter((k[1] for k in tfidf), dtype=np.intp, count=len(tfidf))
    vals = np.fromiter(tfidf.values(), dtype=np.float64, count=len(tfidf))
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(n_doc, n_word))
    norms = np.sqrt(np.asarray(mat.multiply(mat).sum(axis=1)).ravel())
    scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    mat = sp.diags(scale) @ mat
    rng = np.random.default_rng(seed)
    projection = rng.normal(0.0, 1.0 / math.sqrt(dim), size=(n_word, dim))
    values = np.asarray(mat @ projection)
    return EmbeddingMatrix(values, provenance=f"fallback(seed={seed}, dim={dim})")


def write_embeddings(path, ids: list[str], values: np.ndarray) -> None:
    """Write the embedding interchange file (header + one tab-separated row
    per document, values with 17 significant digits)."""
    n, dim = values.shape
    if len(ids) != n:
        raise ValueError("id count does not match embedding rows")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{EMB_HEADER_TAG} {EMB_FORMAT_VERSION} {n} {dim}\n")
        for doc_id, row in zip(ids, values):
            fh.write(doc_id + "\t" + " ".join(format(v, ".17g") for v in row) + "\n")


def load_embeddings(path, bundle: CorpusBundle) -> EmbeddingMatrix:
    """Load an interchange file, reordering rows to the bundle's document order."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 4 or header[0] != EMB_HEADER_TAG or header[1] != EMB_FORMAT_VERSION:
            raise FormatError(f"bad embedding header in {path}")
        try:
            n, dim = int(header[2]), int(header[3])
        except ValueError as exc:
            raise FormatError(f"bad embedding header in {path}") from exc
        by_id: dict[str, np.ndarray] = {}
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            doc_id, _, rest = line.rstrip("\n").partition("\t")
            if not rest:
                raise FormatError(f"line {lineno}: missing tab separator")
            try:
                row = np.array([float(v) for v in rest.split()], dtype=np.float64)
            except ValueError as exc:
                raise FormatError(f"line {lineno}: unparseable value") from exc
            if row.size != dim:
                raise FormatError(
                    f"line {lineno}: expected {dim} values, got {row.size}"
                )
            if not np.all(np.isfinite(row)):
                raise FormatError(f"line {lineno}: non-finite value")
            if doc_id in by_id:
                raise FormatError(f"line {lineno}: duplicate id {doc_id!r}")
            by_id[doc_id] = row
    if len(by_id) != n:
        raise FormatError(f"header declares {n} rows, file has {len(by_id)}")
    if n != bundle.n_doc:
        raise FormatError(f"file has {n} rows, corpus has {bundle.n_doc} documents")
    values = np.empty((bundle.n_doc, dim), dtype=np.float64)
    for i, doc in enumerate(bundle.documents):
        if doc.id not in by_id:
            raise MissingEmbeddingError(doc.id)
        values[i] = by_id[doc.id]
    return EmbeddingMatrix(values, provenance=f"external({path})")


def content_hash(bundle: CorpusBundle) -> str:
    """Hash over document ids and texts only: identifies the graph's corpus."""
    h = hashlib.sha256()
    for d in bundle.documents:
        h.update(json.dumps([d.id, d.text], ensure_ascii=False).encode("utf-8"))
    return h.hexdigest()


def corpus_hash(bundle: CorpusBundle) -> str:
    """Hash over ids, texts, splits, and train/val labels.

    Test-split labels are deliberately excluded: they must never influence
    training, so checkpoints stay identical when they change.
    """
    h = hashlib.sha256()
    for d in bundle.documents:
        label = d.label if d.split in ("train", "val") else None
        h.update(json.dumps([d.id, d.text, d.split, label], ensure_ascii=False).encode("utf-8"))
    return h.hexdigest()
