import factory
import numpy as np
from topics.lda import (
    TopicModel,
    TopicParams,
)


class TopicParamsFactory(factory.Factory):
    K = 2
    alpha = 0.1
    beta = 0.01
    n_iterations = 20
    seed_sets = factory.LazyFunction(dict)
    seed_confidence = 0.0
    rng_seed = 0

    class Meta:
        model = TopicParams


def build_topic_model(
    vocab: tuple[str, ...], n_kw: list[list[int]], n_dk=None, **params
) -> TopicModel:
    """Model with hand-set counts; n_k is derived from n_kw"""
    n_kw = np.array(n_kw, dtype=np.int64)
    if n_dk is None:
        n_dk = np.zeros((1, n_kw.shape[0]), dtype=np.int64)
    params.setdefault("K", n_kw.shape[0])
    return TopicModel(
        vocab=vocab,
        n_dk=np.array(n_dk, dtype=np.int64),
        n_kw=n_kw,
        n_k=n_kw.sum(axis=1),
        params=TopicParamsFactory(**params),
    )


def cluster_documents(
    n_clusters: int,
    docs_per_cluster: int,
    doc_length: int = 10,
    words_per_cluster: int = 6,
    seed: int = 0,
) -> tuple[list[tuple[str, ...]], list[int]]:
    """Documents drawn from disjoint per-cluster vocabularies, with labels"""
    rng = np.random.default_rng(seed)
    docs, labels = [], []
    for cluster in range(n_clusters):
        words = [f"c{cluster}w{idx}" for idx in range(words_per_cluster)]
        for _ in range(docs_per_cluster):
            picks = rng.integers(words_per_cluster, size=doc_length)
            docs.append(tuple(words[int(idx)] for idx in picks))
            labels.append(cluster)
    return docs, labels
