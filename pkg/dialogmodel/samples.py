"""Training/generation samples and padded batches.

Every (dialog, turn) pair yields one sample whose history is the gold prefix
of the dialog. Topic vectors are folded in when the sample is built, so
batches carry only numbers.
"""
import logging
from collections.abc import Sequence
from dataclasses import (
    dataclass,
    field,
)

import numpy as np
from corpus.constants import ReservedTokens
from corpus.text import Vocab
from corpus.types import (
    Corpus,
    Dialog,
)
from dialogmodel.config import ModelConfig
from dialogmodel.constants import TopicModes
from dialogmodel.exceptions import (
    ConfigMismatchError,
    InvalidModelArgument,
)
from django.conf import settings
from topics.documents import (
    sample_document,
    turn_document,
)
from topics.lda import (
    TopicModel,
    infer_theta,
)


logger = logging.getLogger(__name__)


@dataclass
class Sample:
    dialog_id: str
    turn_index: int
    question: np.ndarray
    history: list[np.ndarray]
    answer: np.ndarray
    features: dict[str, np.ndarray] = field(default_factory=dict)
    theta: np.ndarray | None = None
    turn_thetas: list[np.ndarray] | None = None
    question_tokens: tuple[str, ...] = ()
    answer_tokens: tuple[str, ...] = ()


@dataclass
class Batch:
    question_ids: np.ndarray
    question_mask: np.ndarray
    history_ids: np.ndarray
    word_mask: np.ndarray
    turn_mask: np.ndarray
    features: dict[str, np.ndarray]
    feature_present: dict[str, np.ndarray]
    theta: np.ndarray | None
    turn_thetas: np.ndarray | None
    decoder_inputs: np.ndarray
    targets: np.ndarray
    target_mask: np.ndarray

    @property
    def size(self) -> int:
        return self.question_ids.shape[0]

    @property
    def n_turns(self) -> int:
        return self.history_ids.shape[1]

    @property
    def n_target_tokens(self) -> int:
        return int(self.target_mask.sum())


class TopicContext:
    """Folds samples and history turns into a fitted topic model.

    Fold-in chains are seeded from (run seed, dialog index, turn position),
    so a sample's theta does not depend on which other samples are built.
    """

    def __init__(
        self,
        topic_model: TopicModel,
        topic_source: str,
        fold_in_iterations: int | None = None,
        rng_seed: int = 0,
    ):
        self.topic_model = topic_model
        self.topic_source = topic_source
        self.fold_in_iterations = (
            settings.TOPIC_DEFAULTS["fold_in_iterations"]
            if fold_in_iterations is None
            else fold_in_iterations
        )
        self.rng_seed = rng_seed

    @property
    def K(self) -> int:
        return self.topic_model.K

    def sample_theta(
        self, dialog: Dialog, dialog_index: int, turn_position: int
    ) -> np.ndarray:
        doc = sample_document(dialog, turn_position, self.topic_source)
        return infer_theta(
            self.topic_model,
            doc,
            self.fold_in_iterations,
            [self.rng_seed, dialog_index, turn_position],
        )

    def turn_theta(
        self, dialog: Dialog, dialog_index: int, turn_position: int
    ) -> np.ndarray:
        doc = turn_document(dialog, turn_position)
        return infer_theta(
            self.topic_model,
            doc,
            self.fold_in_iterations,
            [self.rng_seed, dialog_index, turn_position, 1],
        )


def history_turn_ids(vocab: Vocab, question, answer, separator: str) -> np.ndarray:
    return np.array(
        vocab.encode(tuple(question) + (separator,) + tuple(answer)), dtype=np.int64
    )


def pooled_features(dialog: Dialog, config: ModelConfig) -> dict[str, np.ndarray]:
    features = {}
    for modality, track in dialog.features.items():
        if modality not in config.modality_dims:
            continue
        if track.dim != config.modality_dims[modality]:
            raise InvalidModelArgument(
                f"Dialog {dialog.dialog_id}: {modality} dim {track.dim} does not "
                f"match configured dim {config.modality_dims[modality]}"
            )
        features[modality] = track.frames.astype(np.float64).mean(axis=0)
    return features


def build_samples(
    corpus: Corpus,
    vocab: Vocab,
    config: ModelConfig,
    topic_context: TopicContext | None = None,
    qa_separator: str | None = None,
    dialog_offset: int = 0,
) -> list[Sample]:
    """One sample per (dialog, turn), in corpus order.

    `dialog_offset` shifts the dialog index used for fold-in seeds, so a
    validation split keeps distinct seeds from the training split.
    """
    if qa_separator is None:
        qa_separator = settings.CORPUS_DEFAULTS["qa_separator"]
    if config.uses_topics:
        if topic_context is None:
            raise InvalidModelArgument(
                f"topic_mode {config.topic_mode} needs a topic model"
            )
        if topic_context.K != config.topic_count:
            raise ConfigMismatchError(
                {"topic_count": (config.topic_count, topic_context.K)}
            )

    samples = []
    for dialog_index, dialog in enumerate(corpus, start=dialog_offset):
        features = pooled_features(dialog, config)
        history: list[np.ndarray] = []
        turn_thetas: list[np.ndarray] = []
        for position, turn in enumerate(dialog.turns):
            theta = None
            if config.topic_mode in (
                TopicModes.DECODER_FEATURE,
                TopicModes.TOPIC_EMBEDDING,
            ):
                theta = topic_context.sample_theta(dialog, dialog_index, position)
            samples.append(
                Sample(
                    dialog_id=dialog.dialog_id,
                    turn_index=turn.turn_index,
                    question=np.array(vocab.encode(turn.question), dtype=np.int64),
                    history=list(history),
                    answer=np.array(vocab.encode(turn.answer), dtype=np.int64),
                    features=features,
                    theta=theta,
                    turn_thetas=(
                        list(turn_thetas)
                        if config.topic_mode == TopicModes.HISTORY_FEATURE
                        else None
                    ),
                    question_tokens=turn.question,
                    answer_tokens=turn.answer,
                )
            )
            history.append(
                history_turn_ids(vocab, turn.question, turn.answer, qa_separator)
            )
            if config.topic_mode == TopicModes.HISTORY_FEATURE:
                turn_thetas.append(
                    topic_context.turn_theta(dialog, dialog_index, position)
                )
    logger.debug("Built %d samples from %d dialogs", len(samples), len(corpus))
    return samples


def _pad(sequences: Sequence[np.ndarray], length: int) -> tuple[np.ndarray, np.ndarray]:
    ids = np.full((len(sequences), length), ReservedTokens.PAD, dtype=np.int64)
    mask = np.zeros((len(sequences), length), dtype=np.float64)
    for row, sequence in enumerate(sequences):
        ids[row, : len(sequence)] = sequence
        mask[row, : len(sequence)] = 1.0
    return ids, mask


def make_batch(samples: Sequence[Sample], config: ModelConfig) -> Batch:
    if not samples:
        raise InvalidModelArgument("Cannot batch zero samples")
    for sample in samples:
        if len(sample.question) == 0:
            raise InvalidModelArgument(
                f"Dialog {sample.dialog_id} turn {sample.turn_index}: empty question"
            )
        if len(sample.answer) == 0:
            raise InvalidModelArgument(
                f"Dialog {sample.dialog_id} turn {sample.turn_index}: empty answer"
            )
    batch_size = len(samples)

    question_ids, question_mask = _pad(
        [sample.question for sample in samples],
        max(len(sample.question) for sample in samples),
    )

    n_turns = max(len(sample.history) for sample in samples)
    max_words = max(
        (len(turn) for sample in samples for turn in sample.history), default=0
    )
    history_ids = np.full(
        (batch_size, n_turns, max_words), ReservedTokens.PAD, dtype=np.int64
    )
    word_mask = np.zeros((batch_size, n_turns, max_words))
    turn_mask = np.zeros((batch_size, n_turns))
    for row, sample in enumerate(samples):
        for position, turn in enumerate(sample.history):
            history_ids[row, position, : len(turn)] = turn
            word_mask[row, position, : len(turn)] = 1.0
            turn_mask[row, position] = 1.0

    features, present = {}, {}
    for modality in config.modalities:
        dim = config.modality_dims[modality]
        values = np.zeros((batch_size, dim))
        flags = np.zeros(batch_size)
        for row, sample in enumerate(samples):
            vector = sample.features.get(modality)
            if vector is None:
                continue
            if vector.shape != (dim,):
                raise InvalidModelArgument(
                    f"{modality} features have shape {vector.shape}, "
                    f"configured dim is {dim}"
                )
            values[row] = vector
            flags[row] = 1.0
        features[modality] = values
        present[modality] = flags

    theta = None
    if config.topic_mode in (TopicModes.DECODER_FEATURE, TopicModes.TOPIC_EMBEDDING):
        theta = np.stack([_theta(sample.theta, config) for sample in samples])
    turn_thetas = None
    if config.topic_mode == TopicModes.HISTORY_FEATURE:
        turn_thetas = np.zeros((batch_size, n_turns, config.topic_count))
        for row, sample in enumerate(samples):
            vectors = sample.turn_thetas or []
            if len(vectors) != len(sample.history):
                raise InvalidModelArgument(
                    f"Dialog {sample.dialog_id} turn {sample.turn_index}: "
                    f"{len(vectors)} turn topic vectors for "
                    f"{len(sample.history)} history turns"
                )
            for position, vector in enumerate(vectors):
                turn_thetas[row, position] = _theta(vector, config)

    answers = [sample.answer for sample in samples]
    length = max(len(answer) for answer in answers) + 1
    decoder_inputs, _ = _pad(
        [np.concatenate([[ReservedTokens.SOS], answer]) for answer in answers], length
    )
    targets, target_mask = _pad(
        [np.concatenate([answer, [ReservedTokens.EOS]]) for answer in answers], length
    )
    return Batch(
        question_ids=question_ids,
        question_mask=question_mask,
        history_ids=history_ids,
        word_mask=word_mask,
        turn_mask=turn_mask,
        features=features,
        feature_present=present,
        theta=theta,
        turn_thetas=turn_thetas,
        decoder_inputs=decoder_inputs,
        targets=targets,
        target_mask=target_mask,
    )


def _theta(vector: np.ndarray | None, config: ModelConfig) -> np.ndarray:
    if vector is None or np.shape(vector) != (config.topic_count,):
        raise InvalidModelArgument(
            f"Topic vector shape {np.shape(vector)} does not match "
            f"topic_count {config.topic_count}"
        )
    return np.asarray(vector, dtype=np.float64)
