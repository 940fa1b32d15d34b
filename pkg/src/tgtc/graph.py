"""Heterogeneous corpus graph: TF-IDF doc-word edges, positive-PPMI word-word
edges from sliding-window co-occurrence, unit self-loops, and symmetric
normalization.

Node order is documents first (0..n_doc-1), then words. The adjacency is
built from canonical upper-triangle triplets mirrored below the diagonal, so
A[i, j] and A[j, i] hold the same float and symmetry is exact, before and
after normalization.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from collections import Counter
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .corpus import CorpusBundle
from .errors import FormatError, InvalidWindowError, ParseError, VersionError, ZeroDegreeError

GRAPH_FORMAT_VERSION = 1
DEFAULT_WINDOW_SIZE = 20

METADATA_FILE = "graph.json"
EDGES_FILE = "edges.tsv"


@dataclass
class WindowCounts:
    """Sliding-window occurrence statistics over the whole corpus.

    Words and pairs are counted once per window regardless of multiplicity;
    pair keys are (i, j) with i < j.
    """

    total: int
    word: dict[int, int]
    pair: dict[tuple[int, int], int]


@dataclass
class HeteroGraph:
    n_doc: int
    n_word: int
    adjacency: sp.csr_matrix
    normalized: bool = False

    @property
    def n_nodes(self) -> int:
        return self.n_doc + self.n_word

    def triu(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Canonical upper triangle (self-loops included), sorted by (row, col)."""
        coo = sp.triu(self.adjacency, k=0).tocoo()
        order = np.lexsort((coo.col, coo.row))
        return coo.row[order], coo.col[order], coo.data[order]

    @property
    def edge_count(self) -> int:
        """Undirected edges including self-loops."""
        return sp.triu(self.adjacency, k=0).nnz


def compute_tf_idf(bundle: CorpusBundle) -> dict[tuple[int, int], float]:
    """Doc-word weights tf * ln(n_doc / df); zero-weight entries omitted."""
    if bundle.tokenized is None or bundle.vocab is None:
        raise ValueError("vocabulary is not built")
    n_doc = bundle.n_doc
    df = bundle.vocab.df
    out: dict[tuple[int, int], float] = {}
    for di, seq in enumerate(bundle.tokenized):
        for wi, tf in Counter(seq).items():
            weight = tf * math.log(n_doc / df[wi])
            if weight != 0.0:
                out[(di, wi)] = weight
    return out


def count_windows(bundle: CorpusBundle, window_size: int) -> WindowCounts:
    """Count sliding windows per document (documents with at most
    ``window_size`` retained tokens yield one window, longer ones L-w+1;
    windows never span documents, and documents with no retained tokens
    contribute none)."""
    if window_size <= 0:
        raise InvalidWindowError(f"window size must be positive, got {window_size}")
    if bundle.tokenized is None:
        raise ValueError("vocabulary is not built")
    total = 0
    word: dict[int, int] = {}
    pair: dict[tuple[int, int], int] = {}
    for seq in bundle.tokenized:
        length = len(seq)
        if length == 0:
            continue
        if length <= window_size:
            windows = [seq]
        else:
            windows = [seq[k : k + window_size] for k in range(length - window_size + 1)]
        for win in windows:
            total += 1
            uniq = sorted(set(win))
            for wi in uniq:
                word[wi] = word.get(wi, 0) + 1
            for a in range(len(uniq)):
                for b in range(a + 1, len(uniq)):
                    key = (uniq[a], uniq[b])
                    pair[key] = pair.get(key, 0) + 1
    return WindowCounts(total, word, pair)


def compute_ppmi(counts: WindowCounts) -> dict[tuple[int, int], float]:
    """Word-pair weights ln((#W(i,j)/#W) / ((#W(i)/#W)(#W(j)/#W))), retained
    only when strictly positive."""
    if counts.total < 1:
        raise ValueError("no windows counted")
    out: dict[tuple[int, int], float] = {}
    for (i, j), wij in counts.pair.items():
        value = math.log(wij * counts.total / (counts.word[i] * counts.word[j]))
        if value > 0.0:
            out[(i, j)] = value
    return out


def assemble_adjacency(
    tfidf: dict[tuple[int, int], float],
    ppmi: dict[tuple[int, int], float],
    n_doc: int,
    n_word: int,
) -> HeteroGraph:
    """Raw adjacency: unit diagonal, mirrored TF-IDF doc-word block, mirrored
    PPMI word-word block, nothing else."""
    n = n_doc + n_word
    upper: dict[tuple[int, int], float] = {(i, i): 1.0 for i in range(n)}
    for (di, wi), w in tfidf.items():
        if not (0 <= di < n_doc and 0 <= wi < n_word):
            raise IndexError(f"tf-idf entry ({di}, {wi}) out of range")
        upper[(di, n_doc + wi)] = w
    for (i, j), w in ppmi.items():
        if not (0 <= i < j < n_word):
            raise IndexError(f"ppmi entry ({i}, {j}) out of range")
        upper[(n_doc + i, n_doc + j)] = w
    return HeteroGraph(n_doc, n_word, _mirror(upper, n), normalized=False)


def _mirror(upper: dict[tuple[int, int], float], n: int) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    for (i, j), w in upper.items():
        rows.append(i)
        cols.append(j)
        vals.append(w)
        if i != j:
            rows.append(j)
            cols.append(i)
            vals.append(w)
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    mat.sort_indices()
    return mat


def normalize_adjacency(graph: HeteroGraph) -> HeteroGraph:
    """Symmetric normalization A_ij / sqrt(D_ii * D_jj).

    Each upper-triangle entry is scaled once and mirrored, keeping symmetry
    exact in floating point.
    """
    if graph.normalized:
        raise ValueError("graph is already normalized")
    degrees = np.asarray(graph.adjacency.sum(axis=1)).ravel()
    if np.any(degrees <= 0.0):
        raise ZeroDegreeError("zero-degree node; self-loops should prevent this")
    inv_sqrt = 1.0 / np.sqrt(degrees)
    rows, cols, vals = graph.triu()
    scaled = {
        (int(i), int(j)): v * inv_sqrt[i] * inv_sqrt[j]
        for i, j, v in zip(rows, cols, vals)
    }
    return HeteroGraph(graph.n_doc, graph.n_word, _mirror(scaled, graph.n_nodes), normalized=True)


def build_graph(bundle: CorpusBundle, window_size: int = DEFAULT_WINDOW_SIZE) -> HeteroGraph:
    """Full raw-graph pipeline: TF-IDF, window counts, PPMI, assembly."""
    tfidf = compute_tf_idf(bundle)
    counts = count_windows(bundle, window_size)
    ppmi = compute_ppmi(counts) if counts.total >= 1 else {}
    return assemble_adjacency(tfidf, ppmi, bundle.n_doc, len(bundle.vocab))


def graph_hash(graph: HeteroGraph) -> str:
    """Hash over the canonical edge list and node counts."""
    h = hashlib.sha256()
    h.update(f"{graph.n_doc} {graph.n_word} {int(graph.normalized)}\n".encode())
    for i, j, v in zip(*graph.triu()):
        h.update(f"{i}\t{j}\t{format(v, '.17g')}\n".encode())
    return h.hexdigest()


def save_graph(
    graph: HeteroGraph,
    outdir,
    window_size: int,
    min_df: int,
    corpus_hash: str,
) -> None:
    """Write the graph artifact: metadata JSON plus a canonical edge list
    (upper triangle, self-loops included, 17-significant-digit weights)."""
    os.makedirs(outdir, exist_ok=True)
    meta = {
        "format_version": GRAPH_FORMAT_VERSION,
        "n_doc": graph.n_doc,
        "n_word": graph.n_word,
        "window_size": window_size,
        "min_df": min_df,
        "edge_count": graph.edge_count,
        "normalized": graph.normalized,
        "corpus_hash": corpus_hash,
    }
    with open(os.path.join(outdir, METADATA_FILE), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(outdir, EDGES_FILE), "w", encoding="utf-8") as fh:
        for i, j, v in zip(*graph.triu()):
            fh.write(f"{i}\t{j}\t{format(v, '.17g')}\n")


def load_graph(indir) -> tuple[HeteroGraph, dict]:
    """Load a graph artifact directory; returns the graph and its metadata."""
    meta_path = os.path.join(indir, METADATA_FILE)
    try:
        with open(meta_path, encoding="utf-8") as fh:
            meta = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"unreadable graph metadata: {exc}") from exc
    if meta.get("format_version") != GRAPH_FORMAT_VERSION:
        raise VersionError(f"unsupported graph format version {meta.get('format_version')!r}")
    n_doc, n_word = meta["n_doc"], meta["n_word"]
    n = n_doc + n_word
    upper: dict[tuple[int, int], float] = {}
    with open(os.path.join(indir, EDGES_FILE), encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if len(parts) != 3:
                raise FormatError(f"edge list line {lineno}: expected 3 fields")
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
            if not (0 <= i <= j < n):
                raise FormatError(f"edge list line {lineno}: index out of range")
            upper[(i, j)] = v
    if len(upper) != meta["edge_count"]:
        raise FormatError(
            f"metadata declares {meta['edge_count']} edges, file has {len(upper)}"
        )
    graph = HeteroGraph(n_doc, n_word, _mirror(upper, n), normalized=meta["normalized"])
    return graph, meta
