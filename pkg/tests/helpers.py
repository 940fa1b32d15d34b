from tgtc import CorpusBundle, Document, build_vocab, tokenize_documents


def make_bundle(texts, labels=None, splits=None, min_df=1):
    """Small in-memory corpus for unit tests."""
    docs = []
    for i, text in enumerate(texts):
        docs.append(
            Document(
                id=f"d{i}",
                text=text,
                label=None if labels is None else labels[i],
                split="unassigned" if splits is None else splits[i],
            )
        )
    bundle = CorpusBundle(docs)
    tokenize_documents(bundle)
    build_vocab(bundle, min_df=min_df)
    return bundle
