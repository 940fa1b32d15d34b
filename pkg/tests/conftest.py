import pytest
from synth_corpus import generate_docs, write_jsonl


@pytest.fixture(scope="session")
def benchmark_jsonl(tmp_path_factory):
    path = tmp_path_factory.mktemp("bench") / "corpus.jsonl"
    return write_jsonl(generate_docs(), path)
