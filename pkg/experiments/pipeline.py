"""Building blocks shared by the commands and the comparison arms."""
import logging
from collections.abc import Sequence
from dataclasses import replace
from pathlib import Path

import numpy as np
from corpus.io import (
    load_avsd_json,
    load_corpus_jsonl,
    load_word_vectors,
)
from corpus.synth import (
    activity_clusters,
    cluster_of,
)
from corpus.text import (
    Vocab,
    build_vocab,
)
from corpus.types import Corpus
from dialogmodel.config import ModelConfig
from dialogmodel.exceptions import ConfigMismatchError
from dialogmodel.generation import Generation
from dialogmodel.samples import (
    Sample,
    TopicContext,
    build_samples,
)
from django.conf import settings
from experiments.constants import TopicKinds
from metrics.types import EvalPair
from topics.documents import (
    TopicDocument,
    category_documents,
)
from topics.lda import (
    TopicModel,
    fit_guided_lda,
    fit_lda,
    purity,
)
from topics.serializers import TopicParamsSerializer


logger = logging.getLogger(__name__)


def load_corpus(path: str | Path, feature_dirs: dict[str, str] | None = None) -> Corpus:
    """AVSD release files end in `.json`, everything else is corpus JSON-lines"""
    path = Path(path)
    if path.suffix == ".json":
        return load_avsd_json(path, feature_dirs or None)
    return load_corpus_jsonl(path)


def strip_modality(corpus: Corpus, modality: str) -> Corpus:
    return Corpus(
        tuple(
            replace(
                dialog,
                features={
                    name: track
                    for name, track in dialog.features.items()
                    if name != modality
                },
            )
            for dialog in corpus
        )
    )


def corpus_vocab(corpus: Corpus) -> Vocab:
    return build_vocab(
        corpus,
        min_count=settings.CORPUS_DEFAULTS["min_count"],
        extra_tokens=[settings.CORPUS_DEFAULTS["qa_separator"]],
    )


def guided_seed_sets(K: int, n_clusters: int) -> dict[int, tuple[str, ...]]:
    """Two seed words per synthetic activity cluster: a verb and an object"""
    clusters = activity_clusters(max(n_clusters, 1))
    return {
        topic: (cluster.verbs[0], cluster.objects[0])
        for topic, cluster in enumerate(clusters[:K])
    }


def fit_topic_model(
    corpus: Corpus,
    block: dict,
    kind: str,
    rng_seed: int,
    K: int | None = None,
    seed_sets: dict | None = None,
) -> tuple[TopicModel, list[TopicDocument]]:
    params = TopicParamsSerializer().create(
        {
            **block,
            "K": K or block["K"],
            "seed_sets": dict(seed_sets or {}),
            "rng_seed": rng_seed,
        }
    )
    documents = category_documents(corpus, block["category"])
    fit = fit_guided_lda if kind == TopicKinds.GUIDED else fit_lda
    model = fit([document.words for document in documents], params)
    logger.info(
        "Fitted %s topic model: K=%d, %d documents (%s)",
        kind,
        params.K,
        len(documents),
        block["category"],
    )
    return model, documents


def topic_purity(
    model: TopicModel,
    corpus: Corpus,
    documents: Sequence[TopicDocument],
    n_clusters: int,
) -> float:
    """Purity of each document's most likely topic against the synthetic
    activity cluster of its dialog.
    """
    clusters = activity_clusters(max(n_clusters, 1))
    labels = {dialog.dialog_id: cluster_of(dialog, clusters) for dialog in corpus}
    true, predicted = [], []
    for doc_id, document in enumerate(documents):
        label = labels.get(document.dialog_id)
        if label is None:
            continue
        true.append(label)
        predicted.append(int(np.argmax(model.document_theta(doc_id))))
    return purity(true, predicted)


def build_model_config(
    vocab: Vocab,
    corpus: Corpus,
    model_block: dict,
    rng_seed: int,
    topic_model: TopicModel | None = None,
) -> ModelConfig:
    return ModelConfig.with_defaults(
        len(vocab),
        modality_dims=corpus.modality_dims(),
        topic_count=0 if topic_model is None else topic_model.K,
        rng_seed=rng_seed,
        **model_block,
    )


def prepare_samples(
    train_corpus: Corpus,
    val_corpus: Corpus,
    vocab: Vocab,
    config: ModelConfig,
    topic_model: TopicModel | None,
    fold_in_iterations: int,
    rng_seed: int,
) -> tuple[list[Sample], list[Sample]]:
    context = None
    if topic_model is not None and config.uses_topics:
        context = TopicContext(
            topic_model, config.topic_source, fold_in_iterations, rng_seed
        )
    train_samples = build_samples(train_corpus, vocab, config, context)
    val_samples = (
        build_samples(val_corpus, vocab, config, context, dialog_offset=len(train_corpus))
        if len(val_corpus)
        else []
    )
    return train_samples, val_samples


def pretrained_embeddings(path: str | Path, vocab: Vocab, config: ModelConfig) -> np.ndarray:
    dim, matrix = load_word_vectors(path, vocab)
    if dim != config.embedding_dim:
        raise ConfigMismatchError({"embedding_dim": (config.embedding_dim, dim)})
    return matrix


def generation_pairs(generations: Sequence[Generation]) -> list[EvalPair]:
    return [
        EvalPair(
            dialog_id=generation.dialog_id,
            turn_index=generation.turn_index,
            hypothesis=generation.hypothesis,
            references=(generation.reference,),
            question=generation.question,
        )
        for generation in generations
    ]
