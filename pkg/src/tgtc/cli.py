"""Command-line pipeline: build the corpus graph, embed documents, train and
evaluate the composite model, sweep the interpolation weight, and run the
classical baselines.

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numerical
failure. Every failure prints a one-line diagnostic to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import baselines, metrics
from .corpus import (
    assign_splits,
    build_vocab,
    content_hash,
    corpus_hash,
    fallback_embed,
    load_corpus,
    load_embeddings,
    tokenize_documents,
    write_embeddings,
)
from .errors import (
    DegenerateSplitError,
    DivergedError,
    DuplicateIdError,
    EmptyCorpusError,
    EmptyEvalError,
    EmptyMaskError,
    EmptyVocabularyError,
    FormatError,
    InvalidDimError,
    InvalidWindowError,
    MissingEmbeddingError,
    NonFiniteGradientError,
    NotNormalizedError,
    ParseError,
    UndefinedAUCError,
    VersionError,
    ZeroDegreeError,
)
from .graph import build_graph, graph_hash, load_graph, normalize_adjacency, save_graph
from .model import build_feature_matrix, forward
from .trainer import TrainConfig, load_checkpoint, save_checkpoint, train

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

_DATA_ERRORS = (
    ParseError,
    DuplicateIdError,
    EmptyCorpusError,
    EmptyVocabularyError,
    FormatError,
    MissingEmbeddingError,
    VersionError,
    DegenerateSplitError,
    EmptyEvalError,
    EmptyMaskError,
    InvalidWindowError,
    InvalidDimError,
    UndefinedAUCError,
    NotNormalizedError,
    FileNotFoundError,
    IsADirectoryError,
    NotADirectoryError,
)
_NUMERIC_ERRORS = (NonFiniteGradientError, DivergedError, ZeroDegreeError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # map argparse usage errors onto exit code 1
        raise UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="tgtc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add_common(p):
        p.add_argument("--config", help="flat key=value file; flags win over it")

    p = sub.add_parser("build", parents=[], help="corpus -> graph artifact + vocab + stats")
    p.add_argument("--corpus", help="corpus JSONL file")
    p.add_argument("--window-size", type=int, default=20, help="sliding-window size (default 20)")
    p.add_argument("--min-df", type=int, default=1, help="minimum document frequency (default 1)")
    p.add_argument("--out", help="output directory")
    add_common(p)
    p.set_defaults(func=cmd_build, required=("corpus", "out"))

    p = sub.add_parser("embed", help="corpus -> fallback embedding file")
    p.add_argument("--corpus", help="corpus JSONL file")
    p.add_argument("--dim", type=int, default=128, help="embedding dimension (default 128)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--min-df", type=int, default=1, help="minimum document frequency (default 1)")
    p.add_argument("--out", help="output embedding file")
    add_common(p)
    p.set_defaults(func=cmd_embed, required=("corpus", "out"))

    def add_train_flags(p):
        p.add_argument("--corpus", help="corpus JSONL file")
        p.add_argument("--graph", help="graph artifact directory from `build`")
        p.add_argument("--embeddings", help="embedding interchange file")
        p.add_argument("--epochs", type=int, default=50, help="training epochs (default 50)")
        p.add_argument("--lr-gcn", type=float, default=1e-3, help="GCN learning rate (default 1e-3)")
        p.add_argument("--lr-head", type=float, default=1e-3, help="head learning rate (default 1e-3)")
        p.add_argument("--hidden", type=int, default=200, help="GCN hidden dim (default 200)")
        p.add_argument("--dropout", type=float, default=0.0, help="dropout rate (default 0)")
        p.add_argument("--patience", type=int, default=10, help="early-stopping patience (default 10)")
        p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
        p.add_argument("--out", help="output directory")
        add_common(p)

    p = sub.add_parser("train", help="graph + embeddings -> checkpoint + history + test metrics")
    p.add_argument("--lambda", dest="lam", type=float, default=0.2,
                   help="interpolation weight between GCN and head (default 0.2)")
    add_train_flags(p)
    p.set_defaults(func=cmd_train, required=("corpus", "graph", "embeddings", "out"))

    p = sub.add_parser("eval", help="checkpoint + graph + embeddings -> metrics + ROC points")
    p.add_argument("--checkpoint", help="checkpoint JSON from `train`")
    p.add_argument("--corpus", help="corpus JSONL file")
    p.add_argument("--graph", help="graph artifact directory")
    p.add_argument("--embeddings", help="embedding interchange file")
    p.add_argument("--seed", type=int, default=0, help="split-assignment seed (default 0)")
    p.add_argument("--out", help="output directory")
    add_common(p)
    p.set_defaults(func=cmd_eval, required=("checkpoint", "corpus", "graph", "embeddings", "out"))

    p = sub.add_parser("ablate", help="train once per interpolation weight; emit a sweep CSV")
    p.add_argument("--lambdas", default="0:1:0.1",
                   help="sweep spec start:end:step or comma list (default 0:1:0.1)")
    p.add_argument("--jobs", type=int, default=1, help="parallel training runs (default 1)")
    add_train_flags(p)
    p.set_defaults(func=cmd_ablate, required=("corpus", "graph", "embeddings", "out"))

    p = sub.add_parser("baseline", help="Naive Bayes + logistic regression metrics")
    p.add_argument("--corpus", help="corpus JSONL file")
    p.add_argument("--min-df", type=int, default=1, help="minimum document frequency (default 1)")
    p.add_argument("--seed", type=int, default=0, help="split-assignment seed (default 0)")
    p.add_argument("--alpha", type=float, default=1.0, help="NB smoothing (default 1.0)")
    p.add_argument("--l2", type=float, default=1.0, help="logistic L2 strength (default 1.0)")
    p.add_argument("--lr", type=float, default=0.05, help="logistic learning rate (default 0.05)")
    p.add_argument("--epochs", type=int, default=500, help="logistic epochs (default 500)")
    p.add_argument("--out", help="output directory")
    add_common(p)
    p.set_defaults(func=cmd_baseline, required=("corpus", "out"))

    return parser


def _read_config_file(path) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            key, sep, value = stripped.partition("=")
            if not sep:
                raise UsageError(f"config line {lineno}: expected key=value")
            values[key.strip()] = value.strip()
    return values


def _apply_config(parser: _Parser, argv: list[str]) -> None:
    """Install config-file values as subparser defaults, so explicit flags win."""
    if not argv or argv[0].startswith("-"):
        return
    command = argv[0]
    if "--config" not in " ".join(argv):
        return
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv[1:])
    if not known.config:
        return
    sub_actions = [a for a in parser._actions if isinstance(a, argparse._SubParsersAction)]
    subparser = sub_actions[0].choices.get(command)
    if subparser is None:
        return  # unknown subcommand; let the main parse report it
    by_flag = {}
    for action in subparser._actions:
        for opt in action.option_strings:
            if opt.startswith("--"):
                by_flag[opt[2:]] = action
    values = _read_config_file(known.config)
    defaults = {}
    for key, raw in values.items():
        action = by_flag.get(key)
        if action is None or key in ("config", "help"):
            raise UsageError(f"unknown config key {key!r} for command {command!r}")
        defaults[action.dest] = action.type(raw) if action.type else raw
    subparser.set_defaults(**defaults)


def _require(args: argparse.Namespace) -> None:
    for name in getattr(args, "required", ()):
        if getattr(args, name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")


def _prepare_bundle(corpus_path, min_df: int):
    bundle = load_corpus(corpus_path)
    tokenize_documents(bundle)
    build_vocab(bundle, min_df=min_df)
    return bundle


def _load_world(args):
    """Shared loader for train/eval/ablate: corpus + graph + features."""
    graph_raw, meta = load_graph(args.graph)
    bundle = load_corpus(args.corpus)
    tokenize_documents(bundle)
    if meta["corpus_hash"] != content_hash(bundle):
        raise FormatError("graph artifact was built from a different corpus")
    build_vocab(bundle, min_df=meta["min_df"])
    if bundle.n_doc != graph_raw.n_doc or len(bundle.vocab) != graph_raw.n_word:
        raise FormatError("corpus and graph artifact disagree on node counts")
    assign_splits(bundle, seed=args.seed)
    emb = load_embeddings(args.embeddings, bundle)
    x = build_feature_matrix(emb, graph_raw.n_word)
    graph = normalize_adjacency(graph_raw) if not graph_raw.normalized else graph_raw
    return bundle, graph, x


def _labeled_test_indices(bundle) -> np.ndarray:
    labels = bundle.labels_array()
    test_idx = bundle.split_indices("test")
    return test_idx[labels[test_idx] >= 0]


def _test_report(bundle, graph, x, params) -> metrics.EvalReport:
    out = forward(x, graph, params)
    labels = bundle.labels_array()
    pred = np.argmax(out.z_final, axis=1)
    return metrics.evaluate(pred, out.z_final, labels, _labeled_test_indices(bundle))


def _write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_build(args) -> None:
    bundle = _prepare_bundle(args.corpus, args.min_df)
    graph = build_graph(bundle, window_size=args.window_size)
    os.makedirs(args.out, exist_ok=True)
    save_graph(graph, args.out, args.window_size, args.min_df, content_hash(bundle))
    with open(os.path.join(args.out, "vocab.tsv"), "w", encoding="utf-8") as fh:
        for token, idx in bundle.vocab.index.items():
            fh.write(f"{token}\t{idx}\t{bundle.vocab.df[idx]}\t{bundle.vocab.freq[idx]}\n")
    stats = {
        "n_doc": graph.n_doc,
        "n_word": graph.n_word,
        "nodes": graph.n_nodes,
        "edges": graph.edge_count,
        "window_size": args.window_size,
        "min_df": args.min_df,
    }
    _write_json(os.path.join(args.out, "stats.json"), stats)
    print(f"built graph: {graph.n_nodes} nodes, {graph.edge_count} edges -> {args.out}")


def cmd_embed(args) -> None:
    bundle = _prepare_bundle(args.corpus, args.min_df)
    emb = fallback_embed(bundle, dim=args.dim, seed=args.seed)
    write_embeddings(args.out, [d.id for d in bundle.documents], emb.values)
    print(f"wrote {emb.rows}x{emb.dim} fallback embeddings -> {args.out}")


def _run_training(bundle, graph, x, config: TrainConfig):
    ckpt, history = train(graph, x, bundle, config)
    report = _test_report(bundle, graph, x, ckpt.params)
    return ckpt, history, report


def cmd_train(args) -> None:
    bundle, graph, x = _load_world(args)
    config = TrainConfig(
        epochs=args.epochs, lr_gcn=args.lr_gcn, lr_head=args.lr_head,
        lam=args.lam, hidden=args.hidden, dropout=args.dropout,
        patience=args.patience, seed=args.seed,
    )
    ckpt, history, report = _run_training(bundle, graph, x, config)
    os.makedirs(args.out, exist_ok=True)
    save_checkpoint(ckpt, os.path.join(args.out, "checkpoint.json"))
    history.save(os.path.join(args.out, "history.csv"))
    with open(os.path.join(args.out, "metrics.json"), "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
    print(
        f"trained {ckpt.epochs_run} epochs (best epoch {ckpt.best_epoch}); "
        f"test accuracy {report.accuracy:.4f}, weighted F1 {report.weighted_f1:.4f}"
    )


def cmd_eval(args) -> None:
    bundle, graph, x = _load_world(args)
    ckpt = load_checkpoint(
        args.checkpoint, corpus_hash=corpus_hash(bundle), graph_hash=graph_hash(graph)
    )
    report = _test_report(bundle, graph, x, ckpt.params)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "metrics.json"), "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
    if report.roc_auc is not None:
        out = forward(x, graph, ckpt.params)
        labels = bundle.labels_array()
        points = metrics.roc_points(
            out.z_final[:, 1], labels, _labeled_test_indices(bundle)
        )
        with open(os.path.join(args.out, "roc.csv"), "w", encoding="utf-8") as fh:
            fh.write("fpr,tpr,threshold\n")
            for fpr, tpr, thr in points:
                fh.write(f"{fpr!r},{tpr!r},{thr!r}\n")
    print(f"test accuracy {report.accuracy:.4f}, weighted F1 {report.weighted_f1:.4f}")


def _parse_lambdas(spec: str) -> list[float]:
    try:
        if ":" in spec:
            start, end, step = (float(v) for v in spec.split(":"))
            if step <= 0 or end < start:
                raise ValueError
            count = int(round((end - start) / step))
            values = [round(start + k * step, 10) for k in range(count + 1)]
        else:
            values = [float(v) for v in spec.split(",")]
    except ValueError:
        raise UsageError(f"bad --lambdas spec {spec!r}") from None
    for v in values:
        if not 0.0 <= v <= 1.0:
            raise UsageError(f"lambda {v} outside [0, 1]")
    return values


def cmd_ablate(args) -> None:
    bundle, graph, x = _load_world(args)
    lambdas = _parse_lambdas(args.lambdas)

    def run(lam: float):
        config = TrainConfig(
            epochs=args.epochs, lr_gcn=args.lr_gcn, lr_head=args.lr_head,
            lam=lam, hidden=args.hidden, dropout=args.dropout,
            patience=args.patience, seed=args.seed,
        )
        _, _, report = _run_training(bundle, graph, x, config)
        return report

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(run, lambdas))
    else:
        reports = [run(lam) for lam in lambdas]
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "ablation.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("lambda,accuracy,weighted_f1,roc_auc\n")
        for lam, report in zip(lambdas, reports):
            auc = "" if report.roc_auc is None else repr(report.roc_auc)
            fh.write(f"{lam!r},{report.accuracy!r},{report.weighted_f1!r},{auc}\n")
    print(f"swept {len(lambdas)} lambda values -> {path}")


def cmd_baseline(args) -> None:
    bundle = _prepare_bundle(args.corpus, args.min_df)
    assign_splits(bundle, seed=args.seed)
    features = baselines.tfidf_features(bundle)
    labels = bundle.labels_array()
    # Classical models use the whole 70% pool; validation is only needed for
    # the neural model's selection.
    pool_idx = np.concatenate([bundle.split_indices("train"), bundle.split_indices("val")])
    pool_idx = pool_idx[labels[pool_idx] >= 0]
    test_idx = _labeled_test_indices(bundle)
    n_class = bundle.n_class

    nb = baselines.nb_fit(features[pool_idx], labels[pool_idx], alpha=args.alpha, n_class=n_class)
    nb_pred, nb_prob = baselines.nb_predict(nb, features)
    nb_report = metrics.evaluate(nb_pred, nb_prob, labels, test_idx)

    lr_model = baselines.logreg_fit(
        features[pool_idx], labels[pool_idx],
        l2=args.l2, lr=args.lr, epochs=args.epochs, seed=args.seed, n_class=n_class,
    )
    lr_pred, lr_prob = baselines.logreg_predict(lr_model, features)
    lr_report = metrics.evaluate(lr_pred, lr_prob, labels, test_idx)

    os.makedirs(args.out, exist_ok=True)
    _write_json(
        os.path.join(args.out, "baseline_metrics.json"),
        {"naive_bayes": nb_report.to_dict(), "logistic_regression": lr_report.to_dict()},
    )
    print(
        f"naive bayes accuracy {nb_report.accuracy:.4f}, "
        f"logistic regression accuracy {lr_report.accuracy:.4f}"
    )


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        if getattr(args, "func", None) is None:
            raise UsageError("a subcommand is required (see --help)")
        _require(args)
        args.func(args)
        return EXIT_OK
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    except (UsageError, ValueError) as exc:
        print(f"tgtc: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _DATA_ERRORS as exc:
        print(f"tgtc: {exc}", file=sys.stderr)
        return EXIT_DATA
    except _NUMERIC_ERRORS as exc:
        print(f"tgtc: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def entry() -> None:
    sys.exit(main())
