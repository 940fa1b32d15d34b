import json

import numpy as np
import pytest
from synth_corpus import generate_docs, write_jsonl

from tgtc.cli import main


@pytest.fixture(scope="module")
def small_corpus(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "corpus.jsonl"
    return write_jsonl(generate_docs(n_docs=60), path)


@pytest.fixture(scope="module")
def built(tmp_path_factory, small_corpus):
    """Graph artifact + embeddings shared by the pipeline tests."""
    root = tmp_path_factory.mktemp("artifacts")
    graph_dir = root / "graph"
    emb_path = root / "emb.tsv"
    assert main(["build", "--corpus", str(small_corpus), "--window-size", "5",
                 "--out", str(graph_dir)]) == 0
    assert main(["embed", "--corpus", str(small_corpus), "--dim", "16",
                 "--seed", "0", "--out", str(emb_path)]) == 0
    return small_corpus, graph_dir, emb_path


def train_args(corpus, graph_dir, emb_path, out, **overrides):
    args = ["train", "--corpus", str(corpus), "--graph", str(graph_dir),
            "--embeddings", str(emb_path), "--out", str(out),
            "--epochs", "8", "--hidden", "8"]
    for key, value in overrides.items():
        args += [f"--{key.replace('_', '-')}", str(value)]
    return args


class TestBuild:
    def test_stats_node_count_law(self, tmp_path, small_corpus):
        out = tmp_path / "g"
        assert main(["build", "--corpus", str(small_corpus), "--out", str(out)]) == 0
        stats = json.loads((out / "stats.json").read_text())
        assert stats["nodes"] == stats["n_doc"] + stats["n_word"]
        assert stats["n_doc"] == 60
        assert (out / "edges.tsv").exists() and (out / "vocab.tsv").exists()

    def test_three_doc_sample(self, tmp_path):
        corpus = tmp_path / "c.jsonl"
        corpus.write_text(
            '{"id": "a", "text": "x y", "label": 0, "split": "train"}\n'
            '{"id": "b", "text": "y z", "label": 1, "split": "train"}\n'
            '{"id": "c", "text": "z w", "label": null, "split": "test"}\n'
        )
        out = tmp_path / "g"
        assert main(["build", "--corpus", str(corpus), "--out", str(out)]) == 0
        stats = json.loads((out / "stats.json").read_text())
        assert stats["nodes"] == 3 + stats["n_word"]


class TestTrainCli:
    def test_train_emits_artifacts(self, tmp_path, built):
        corpus, graph_dir, emb = built
        out = tmp_path / "run"
        assert main(train_args(corpus, graph_dir, emb, out)) == 0
        assert (out / "checkpoint.json").exists()
        assert (out / "history.csv").exists()
        metrics = json.loads((out / "metrics.json").read_text())
        assert 0.0 <= metrics["accuracy"] <= 1.0
        header = (out / "history.csv").read_text().splitlines()[0]
        assert header == "epoch,train_loss,val_accuracy,val_weighted_f1"

    def test_deterministic_artifacts(self, tmp_path, built):
        corpus, graph_dir, emb = built
        first, second = tmp_path / "r1", tmp_path / "r2"
        assert main(train_args(corpus, graph_dir, emb, first, seed=3)) == 0
        assert main(train_args(corpus, graph_dir, emb, second, seed=3)) == 0
        for name in ("checkpoint.json", "history.csv", "metrics.json"):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_artifacts_reload_through_module_loaders(self, tmp_path, built):
        corpus, graph_dir, emb = built
        run = tmp_path / "reload_run"
        assert main(train_args(corpus, graph_dir, emb, run)) == 0
        from tgtc import load_checkpoint, load_corpus, load_embeddings, load_graph
        from tgtc.trainer import TrainHistory

        graph, meta = load_graph(graph_dir)
        assert graph.n_doc == meta["n_doc"]
        bundle = load_corpus(corpus)
        from tgtc import build_vocab, tokenize_documents

        tokenize_documents(bundle)
        build_vocab(bundle, min_df=meta["min_df"])
        embeddings = load_embeddings(emb, bundle)
        assert embeddings.rows == bundle.n_doc
        ckpt = load_checkpoint(run / "checkpoint.json")
        history = TrainHistory.from_csv(run / "history.csv")
        assert len(history.records) == ckpt.epochs_run
        assert json.loads((run / "metrics.json").read_text())["count"] > 0

    def test_eval_round_trip(self, tmp_path, built):
        corpus, graph_dir, emb = built
        run = tmp_path / "run"
        assert main(train_args(corpus, graph_dir, emb, run)) == 0
        out = tmp_path / "eval"
        assert main(["eval", "--checkpoint", str(run / "checkpoint.json"),
                     "--corpus", str(corpus), "--graph", str(graph_dir),
                     "--embeddings", str(emb), "--out", str(out)]) == 0
        evaluated = json.loads((out / "metrics.json").read_text())
        trained = json.loads((run / "metrics.json").read_text())
        assert evaluated == trained
        roc = (out / "roc.csv").read_text().splitlines()
        assert roc[0] == "fpr,tpr,threshold"
        assert len(roc) > 2


class TestAblateCli:
    def test_default_sweep_eleven_rows(self, tmp_path, built):
        corpus, graph_dir, emb = built
        out = tmp_path / "ablate"
        args = train_args(corpus, graph_dir, emb, out)
        args[0] = "ablate"
        assert main(args) == 0
        rows = (out / "ablation.csv").read_text().splitlines()
        assert rows[0] == "lambda,accuracy,weighted_f1,roc_auc"
        assert len(rows) == 12
        lams = [float(r.split(",")[0]) for r in rows[1:]]
        np.testing.assert_allclose(lams, np.arange(11) / 10, atol=1e-12)
        for row in rows[1:]:
            values = [float(v) for v in row.split(",")]
            assert all(np.isfinite(values))

    def test_endpoints_match_standalone_runs(self, tmp_path, built):
        corpus, graph_dir, emb = built
        out = tmp_path / "ablate2"
        args = train_args(corpus, graph_dir, emb, out)
        args[0] = "ablate"
        args += ["--lambdas", "0,1"]
        assert main(args) == 0
        rows = (out / "ablation.csv").read_text().splitlines()[1:]
        for lam, row in zip((0.0, 1.0), rows):
            run = tmp_path / f"run{lam}"
            assert main(train_args(corpus, graph_dir, emb, run, **{"lambda": lam})) == 0
            metrics = json.loads((run / "metrics.json").read_text())
            cells = row.split(",")
            assert float(cells[0]) == lam
            assert float(cells[1]) == metrics["accuracy"]
            assert float(cells[2]) == metrics["weighted_f1"]
            assert float(cells[3]) == metrics["roc_auc"]


class TestBaselineCli:
    def test_emits_both_reports(self, tmp_path, small_corpus):
        out = tmp_path / "base"
        assert main(["baseline", "--corpus", str(small_corpus), "--out", str(out)]) == 0
        payload = json.loads((out / "baseline_metrics.json").read_text())
        assert set(payload) == {"naive_bayes", "logistic_regression"}
        for report in payload.values():
            assert 0.0 <= report["accuracy"] <= 1.0


class TestConfigFile:
    def test_flags_win_over_config(self, tmp_path, built):
        corpus, graph_dir, emb = built
        config = tmp_path / "run.cfg"
        config.write_text(f"epochs = 4\nseed = 9\ncorpus = {corpus}\n")
        out = tmp_path / "cfg_run"
        assert main(["train", "--config", str(config), "--graph", str(graph_dir),
                     "--embeddings", str(emb), "--out", str(out),
                     "--epochs", "6", "--hidden", "8"]) == 0
        ckpt = json.loads((out / "checkpoint.json").read_text())
        assert ckpt["meta"]["config"]["epochs"] == 6  # flag wins
        assert ckpt["meta"]["config"]["seed"] == 9    # config fills the rest

    def test_unknown_key_rejected(self, tmp_path, built):
        corpus, graph_dir, emb = built
        config = tmp_path / "bad.cfg"
        config.write_text("not-a-flag = 3\n")
        code = main(["train", "--config", str(config), "--corpus", str(corpus),
                     "--graph", str(graph_dir), "--embeddings", str(emb),
                     "--out", str(tmp_path / "x")])
        assert code == 1


class TestExitCodes:
    def test_usage_error(self):
        assert main(["train"]) == 1  # missing required flags
        assert main(["no-such-command"]) == 1
        assert main([]) == 1

    def test_data_error(self, tmp_path):
        corpus = tmp_path / "c.jsonl"
        corpus.write_text('{"id": "a", "text": "x"}\n{"id": "a", "text": "y"}\n')
        assert main(["build", "--corpus", str(corpus), "--out", str(tmp_path / "g")]) == 2

    def test_missing_file(self, tmp_path):
        assert main(["build", "--corpus", str(tmp_path / "nope.jsonl"),
                     "--out", str(tmp_path / "g")]) == 2

    def test_graph_corpus_mismatch(self, tmp_path, built):
        corpus, graph_dir, emb = built
        other = tmp_path / "other.jsonl"
        write_jsonl(generate_docs(n_docs=30), other)
        code = main(["train", "--corpus", str(other), "--graph", str(graph_dir),
                     "--embeddings", str(emb), "--out", str(tmp_path / "o")])
        assert code == 2

    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0
        assert main(["train", "--help"]) == 0
        capsys.readouterr()


class TestHelpListsDefaults:
    @pytest.mark.parametrize(
        "command,expected",
        [
            ("build", ["--window-size", "--min-df", "20", "--corpus", "--out"]),
            ("embed", ["--dim", "128", "--seed"]),
            ("train", ["--lambda", "0.2", "--epochs", "50", "--lr-gcn", "1e-3",
                       "--lr-head", "--hidden", "200", "--dropout", "--patience", "10"]),
            ("eval", ["--checkpoint", "--graph", "--embeddings"]),
            ("ablate", ["--lambdas", "0:1:0.1", "--jobs"]),
            ("baseline", ["--alpha", "--l2", "--lr", "--epochs"]),
        ],
    )
    def test_flags_and_defaults_present(self, command, expected, capsys):
        assert main([command, "--help"]) == 0
        text = capsys.readouterr().out
        for token in expected:
            assert token in text
