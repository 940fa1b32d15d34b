"""Run a pretrained transformer encoder over a JSONL corpus and write the
document embeddings in the tgtc interchange format.

The encoder stays frozen and in evaluation mode; one output row per
document, dimension equal to the encoder hidden size. Deterministic mode
trades throughput for byte-identical output across runs.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import torch

log = logging.getLogger("tgtc_bridge")

POOLING_STRATEGIES = ("cls", "mean")
HEADER_TAG = "tgtc-emb"
FORMAT_VERSION = "v1"


class BridgeError(Exception):
    """Corpus, configuration, or encoder failure."""


@dataclass
class BridgeConfig:
    corpus: str
    model: str
    out: str
    pooling: str = "cls"
    max_len: int = 512
    batch_size: int = 32
    deterministic: bool = False

    def validate(self) -> None:
        if self.pooling not in POOLING_STRATEGIES:
            raise BridgeError(f"pooling must be one of {POOLING_STRATEGIES}")
        if self.max_len < 8:
            raise BridgeError("max sequence length must be at least 8")
        if self.batch_size < 1:
            raise BridgeError("batch size must be at least 1")


def read_corpus(path) -> list[tuple[str, str]]:
    """Minimal JSONL reader: (id, text) pairs in file order."""
    records: list[tuple[str, str]] = []
    seen: set[str] = set()
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise BridgeError(f"cannot read corpus: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise BridgeError(f"corpus line {lineno}: {exc}") from exc
            if "id" not in rec or "text" not in rec:
                raise BridgeError(f"corpus line {lineno}: record needs 'id' and 'text'")
            doc_id = str(rec["id"])
            if doc_id in seen:
                raise BridgeError(f"corpus line {lineno}: duplicate id {doc_id!r}")
            seen.add(doc_id)
            records.append((doc_id, str(rec["text"])))
    if not records:
        raise BridgeError("corpus is empty")
    return records


def load_encoder(model_id: str):
    from transformers import AutoModel, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(model_id)
        model = AutoModel.from_pretrained(model_id)
    except Exception as exc:
        raise BridgeError(f"cannot load encoder {model_id!r}: {exc}") from exc
    model.eval()
    return tokenizer, model


def _pool(hidden: torch.Tensor, attention_mask: torch.Tensor, pooling: str) -> torch.Tensor:
    if pooling == "cls":
        return hidden[:, 0, :]
    mask = attention_mask.unsqueeze(-1).to(hidden.dtype)
    return (hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1.0)


def export_embeddings(config: BridgeConfig) -> str:
    """Encode every document and write the interchange file; returns its path."""
    config.validate()
    if config.deterministic:
        torch.manual_seed(0)
        torch.set_num_threads(1)
        torch.use_deterministic_algorithms(True)
    records = read_corpus(config.corpus)
    tokenizer, model = load_encoder(config.model)

    rows: list[tuple[str, list[float]]] = []
    with torch.no_grad():
        for start in range(0, len(records), config.batch_size):
            batch = records[start : start + config.batch_size]
            texts = [text for _, text in batch]
            for doc_id, text in batch:
                length = len(tokenizer(text, truncation=False)["input_ids"])
                if length > config.max_len:
                    log.warning(
                        "document %s has %d tokens; truncating to %d",
                        doc_id, length, config.max_len,
                    )
            encoded = tokenizer(
                texts,
                padding=True,
                truncation=True,
                max_length=config.max_len,
                return_tensors="pt",
            )
            output = model(**encoded)
            pooled = _pool(output.last_hidden_state, encoded["attention_mask"], config.pooling)
            if not torch.isfinite(pooled).all():
                raise BridgeError("encoder produced non-finite values")
            for (doc_id, _), vector in zip(batch, pooled):
                rows.append((doc_id, [float(v) for v in vector]))

    dim = len(rows[0][1])
    with open(config.out, "w", encoding="utf-8") as fh:
        fh.write(f"{HEADER_TAG} {FORMAT_VERSION} {len(rows)} {dim}\n")
        for doc_id, vector in rows:
            fh.write(doc_id + "\t" + " ".join(format(v, ".9g") for v in vector) + "\n")
    return config.out
