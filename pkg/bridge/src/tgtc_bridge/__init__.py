"""Transformer-encoder embedding exporter for the tgtc interchange format."""

from .export import BridgeConfig, BridgeError, export_embeddings, read_corpus

__version__ = "0.1.0"
