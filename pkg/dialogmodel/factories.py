import factory
import numpy as np
from corpus.constants import ReservedTokens
from corpus.text import build_vocab
from corpus.types import Corpus
from dialogmodel.config import (
    DecodeOptions,
    ModelConfig,
    TrainingOptions,
)
from dialogmodel.constants import AttentionVariants
from dialogmodel.samples import Sample


class ModelConfigFactory(factory.Factory):
    vocab_size = 20
    embedding_dim = 6
    word_hidden_dim = 5
    sentence_hidden_dim = 4
    question_hidden_dim = 5
    decoder_hidden_dim = 6
    modality_dims = factory.LazyFunction(dict)
    modality_projection_dim = 3
    av_dim = 4
    attention_variant = AttentionVariants.SENT_ALL_STATES
    topic_embedding_dim = 3
    rng_seed = 0

    class Meta:
        model = ModelConfig


class TrainingOptionsFactory(factory.Factory):
    optimizer = "adam"
    learning_rate = 1e-2
    epochs = 3
    batch_size = 4
    checkpoint_every = 1
    rng_seed = 0

    class Meta:
        model = TrainingOptions


class DecodeOptionsFactory(factory.Factory):
    mode = "greedy"
    beam_width = 3
    max_length = 8
    length_penalty = 1.0

    class Meta:
        model = DecodeOptions


def corpus_vocab(corpus: Corpus, separator: str = "<qa>"):
    return build_vocab(corpus, extra_tokens=[separator])


def random_sample(
    config: ModelConfig,
    rng: np.random.Generator,
    n_turns: int = 2,
    question_length: int = 3,
    answer_length: int = 3,
    dialog_id: str = "sample",
) -> Sample:
    """Sample with random ids, features and topic vectors for `config`"""
    low = len(ReservedTokens.TOKENS)

    def ids(length: int) -> np.ndarray:
        return rng.integers(low, config.vocab_size, size=length)

    K = config.topic_count
    return Sample(
        dialog_id=dialog_id,
        turn_index=n_turns,
        question=ids(question_length),
        history=[ids(int(rng.integers(3, 6))) for _ in range(n_turns)],
        answer=ids(answer_length),
        features={
            modality: rng.uniform(-1.0, 1.0, size=dim)
            for modality, dim in config.modality_dims.items()
        },
        theta=rng.dirichlet(np.ones(K)) if K else None,
        turn_thetas=[rng.dirichlet(np.ones(K)) for _ in range(n_turns)] if K else None,
    )
