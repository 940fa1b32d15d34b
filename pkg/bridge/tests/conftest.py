import json

import pytest
import torch
from transformers import BertConfig, BertModel, BertTokenizerFast

SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
WORDS = [
    "sun", "moon", "star", "cloud", "rain", "wind", "tree", "leaf",
    "stone", "river", "shore", "wave", "light", "dark", "warm", "cold",
]


@pytest.fixture(scope="session")
def tiny_encoder(tmp_path_factory):
    """Small randomly-initialized encoder saved in pretrained format, so the
    real from_pretrained loading path runs without any network access."""
    path = tmp_path_factory.mktemp("encoder")
    config = BertConfig(
        vocab_size=len(SPECIALS) + len(WORDS),
        hidden_size=16,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=32,
        max_position_embeddings=64,
    )
    torch.manual_seed(7)
    model = BertModel(config)
    model.save_pretrained(path)
    vocab_file = path / "vocab.txt"
    vocab_file.write_text("\n".join(SPECIALS + WORDS) + "\n")
    BertTokenizerFast(vocab_file=str(vocab_file), do_lower_case=True).save_pretrained(path)
    return str(path)


@pytest.fixture(scope="session")
def sample_corpus(tmp_path_factory):
    """Ten labeled documents with preassigned splits (6 train / 1 val / 3 test)."""
    path = tmp_path_factory.mktemp("corpus") / "sample.jsonl"
    splits = ["train"] * 6 + ["val"] + ["test"] * 3
    records = []
    for i in range(10):
        words = [WORDS[(i + k) % len(WORDS)] for k in range(4 + i % 3)]
        records.append(
            {
                "id": f"doc{i}",
                "text": " ".join(words),
                "label": i % 2,
                "split": splits[i],
            }
        )
    records[4]["text"] = ""  # empty document must still get an embedding row
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    return str(path)
