"""Hierarchical encoder-decoder for answering questions about a video.

The question LSTM, the word LSTM over history turns and the answer decoder
share one embedding table. The decoder starts from a fused summary of the
question, the history, the audio-visual features and, optionally, a topic
embedding, and attends over the memory selected by the attention variant.
"""
from dataclasses import dataclass

import numpy as np
from dialogmodel.config import ModelConfig
from dialogmodel.constants import (
    AttentionVariants,
    TopicModes,
)
from dialogmodel.exceptions import InvalidModelArgument
from dialogmodel.samples import Batch
from nnkit import ops
from nnkit.layers import (
    LSTM,
    Embedding,
    Linear,
    ParameterStore,
)
from nnkit.tensor import Tensor


@dataclass
class HistoryEncoding:
    word_states: Tensor | None
    turn_last: Tensor | None
    sentence_states: Tensor | None
    h: Tensor
    word_mask: np.ndarray
    turn_mask: np.ndarray

    @property
    def n_turns(self) -> int:
        return self.turn_mask.shape[1]


@dataclass
class EncodedDialog:
    q: Tensor
    history: HistoryEncoding
    av: Tensor | None
    theta: np.ndarray | None
    topic_vector: Tensor | None
    memory: Tensor | None
    memory_mask: np.ndarray | None
    keys: Tensor | None

    @property
    def n_memory_rows(self) -> int:
        return 0 if self.memory is None else self.memory.shape[1]


@dataclass
class DecoderOutput:
    logits: Tensor
    h: Tensor
    c: Tensor
    weights: np.ndarray | None


class AVSDModel:
    def __init__(self, config: ModelConfig, pretrained_embeddings: np.ndarray | None = None):
        config.validate()
        self.config = config
        self.store = store = ParameterStore(rng_seed=config.rng_seed)
        E = config.embedding_dim
        K = config.topic_count

        self.embedding = Embedding(
            store,
            "embedding",
            config.vocab_size,
            E,
            pretrained=pretrained_embeddings,
            trainable=config.train_embeddings,
        )
        self.question_lstm = LSTM(store, "question_lstm", E, config.question_hidden_dim)
        self.word_lstm = LSTM(store, "word_lstm", E, config.word_hidden_dim)
        sentence_in = config.word_hidden_dim
        if config.topic_mode == TopicModes.HISTORY_FEATURE:
            sentence_in += K
        self.sentence_lstm = LSTM(
            store, "sentence_lstm", sentence_in, config.sentence_hidden_dim
        )

        self.modality_projections = {
            modality: Linear(
                store,
                f"modality.{modality}",
                config.modality_dims[modality],
                config.modality_projection_dim,
            )
            for modality in config.modalities
        }
        self.fusion = None
        if config.modalities:
            self.fusion = Linear(
                store,
                "fusion",
                config.modality_projection_dim * len(config.modalities),
                config.av_dim,
            )

        self.topic_embedding = None
        if config.topic_mode == TopicModes.TOPIC_EMBEDDING:
            self.topic_embedding = Embedding(
                store, "topic_embedding", K, config.topic_embedding_dim
            )

        init_in = config.question_hidden_dim + config.sentence_hidden_dim
        if config.modalities:
            init_in += config.av_dim
        if self.topic_embedding is not None:
            init_in += config.topic_embedding_dim
        self.init = Linear(store, "init", init_in, config.decoder_hidden_dim)

        decoder_in = E + (K if config.topic_mode == TopicModes.DECODER_FEATURE else 0)
        self.decoder_lstm = LSTM(
            store, "decoder_lstm", decoder_in, config.decoder_hidden_dim
        )

        D = config.memory_dim
        self.memory_projection = None
        self.av_projection = None
        self.attention_weight = None
        if config.attention_variant != AttentionVariants.NO_ATTENTION:
            if D != config.natural_memory_dim:
                self.memory_projection = Linear(
                    store, "attention.memory", config.natural_memory_dim, D
                )
            if config.attention_variant == AttentionVariants.SENT_ALL_STATES_PLUS_AV:
                self.av_projection = Linear(store, "attention.av", config.av_dim, D)
            self.attention_weight = store.matrix(
                "attention.weight", D, config.decoder_hidden_dim
            )
        self.output = Linear(
            store, "output", config.decoder_hidden_dim + D, config.vocab_size
        )

    def parameters(self):
        return list(self.store)

    def encode_question(self, question_ids, mask: np.ndarray | None = None) -> Tensor:
        """Final question-LSTM state, (B, question_hidden_dim)"""
        ids = np.atleast_2d(np.asarray(question_ids, dtype=np.int64))
        if mask is None:
            mask = np.ones(ids.shape)
        if ids.shape[1] == 0 or not np.asarray(mask).any(axis=1).all():
            raise InvalidModelArgument("Cannot encode an empty question")
        _, h, _ = self.question_lstm(self.embedding(ids), mask)
        return h

    def encode_history(
        self,
        history_ids: np.ndarray,
        word_mask: np.ndarray,
        turn_mask: np.ndarray,
        turn_thetas: np.ndarray | None = None,
    ) -> HistoryEncoding:
        """Word LSTM over each turn, sentence LSTM over the turns.

        A batch without history turns leaves every memory empty and the
        final state at zero.
        """
        batch_size, n_turns, n_words = history_ids.shape
        if n_turns == 0 or n_words == 0:
            return HistoryEncoding(
                word_states=None,
                turn_last=None,
                sentence_states=None,
                h=Tensor(np.zeros((batch_size, self.config.sentence_hidden_dim))),
                word_mask=np.zeros((batch_size, 0, 0)),
                turn_mask=np.zeros((batch_size, 0)),
            )

        flat_ids = history_ids.reshape(batch_size * n_turns, n_words)
        flat_mask = word_mask.reshape(batch_size * n_turns, n_words)
        word_out, last, _ = self.word_lstm(self.embedding(flat_ids), flat_mask)
        word_states = ops.reshape(
            word_out, (batch_size, n_turns, n_words, self.config.word_hidden_dim)
        )
        turn_last = ops.reshape(
            last, (batch_size, n_turns, self.config.word_hidden_dim)
        )

        sentence_in = turn_last
        if self.config.topic_mode == TopicModes.HISTORY_FEATURE:
            if turn_thetas is None:
                raise InvalidModelArgument("history_feature mode needs turn topics")
            sentence_in = ops.concat([turn_last, turn_thetas], axis=-1)
        sentence_states, h, _ = self.sentence_lstm(sentence_in, turn_mask)
        return HistoryEncoding(
            word_states=word_states,
            turn_last=turn_last,
            sentence_states=sentence_states,
            h=h,
            word_mask=word_mask,
            turn_mask=turn_mask,
        )

    def encode_modalities(
        self,
        features: dict[str, np.ndarray],
        present: dict[str, np.ndarray] | None = None,
    ) -> Tensor | None:
        """Fused audio-visual vector from mean-pooled features, (B, av_dim).

        A modality absent for a row contributes a zero slot.
        """
        if not self.config.modalities:
            return None
        unknown = sorted(set(features) - set(self.config.modalities))
        if unknown:
            raise InvalidModelArgument(f"Unconfigured modalities: {unknown}")
        batch_size = next(
            (np.atleast_2d(values).shape[0] for values in features.values()), 1
        )
        slots = []
        for modality in self.config.modalities:
            dim = self.config.modality_dims[modality]
            values = features.get(modality)
            if values is None:
                slots.append(np.zeros((batch_size, self.config.modality_projection_dim)))
                continue
            values = np.atleast_2d(np.asarray(values, dtype=np.float64))
            if values.shape != (batch_size, dim):
                raise InvalidModelArgument(
                    f"{modality} features have shape {values.shape}, "
                    f"expected ({batch_size}, {dim})"
                )
            slot = ops.tanh(self.modality_projections[modality](values))
            flags = None if present is None else present.get(modality)
            if flags is not None and not np.all(flags):
                slot = ops.mul(slot, np.asarray(flags, dtype=np.float64)[:, None])
            slots.append(slot)
        return ops.tanh(self.fusion(ops.concat(slots, axis=-1)))

    def topic_vector(self, theta: np.ndarray | None) -> Tensor | None:
        if self.topic_embedding is None:
            return None
        if theta is None:
            raise InvalidModelArgument("topic_embedding mode needs topic vectors")
        return self.topic_embedding(np.argmax(theta, axis=-1))

    def build_memory(
        self, history: HistoryEncoding, av: Tensor | None
    ) -> tuple[Tensor | None, np.ndarray | None]:
        variant = self.config.attention_variant
        if variant == AttentionVariants.NO_ATTENTION:
            return None, None
        batch_size = history.h.shape[0]
        rows, mask = None, np.zeros((batch_size, 0), dtype=bool)
        if history.n_turns:
            if variant == AttentionVariants.WORD_ALL_STATES:
                n_rows = history.word_mask.shape[1] * history.word_mask.shape[2]
                rows = ops.reshape(
                    history.word_states,
                    (batch_size, n_rows, self.config.word_hidden_dim),
                )
                mask = history.word_mask.reshape(batch_size, n_rows) > 0
            elif variant == AttentionVariants.WORD_LAST_STATES:
                rows, mask = history.turn_last, history.turn_mask > 0
            else:
                rows, mask = history.sentence_states, history.turn_mask > 0
            if self.memory_projection is not None:
                rows = self.memory_projection(rows)
        if self.av_projection is not None:
            av_row = ops.reshape(
                ops.tanh(self.av_projection(av)),
                (batch_size, 1, self.config.memory_dim),
            )
            rows = av_row if rows is None else ops.concat([rows, av_row], axis=1)
            mask = np.concatenate([mask, np.ones((batch_size, 1), dtype=bool)], axis=1)
        if rows is None:
            return None, None
        return rows, mask

    def attention_keys(self, memory: Tensor) -> Tensor:
        return ops.matmul(memory, self.attention_weight)

    def attend(
        self,
        query: Tensor,
        memory: Tensor,
        mask: np.ndarray | None = None,
        keys: Tensor | None = None,
    ) -> tuple[Tensor, Tensor]:
        """Bilinear attention: (context (B, D), weights (B, M))"""
        if self.attention_weight is None:
            raise InvalidModelArgument("no_attention models do not attend")
        batch_size, n_rows = memory.shape[0], memory.shape[1]
        if mask is None:
            mask = np.ones((batch_size, n_rows), dtype=bool)
        mask = np.asarray(mask, dtype=bool)
        if n_rows == 0 or not mask.any(axis=1).all():
            raise InvalidModelArgument("Every memory row is masked")
        if keys is None:
            keys = self.attention_keys(memory)
        scores = ops.sum(
            ops.mul(keys, ops.reshape(query, (batch_size, 1, query.shape[-1]))),
            axis=-1,
        )
        weights = ops.softmax(scores, axis=-1, mask=mask)
        context = ops.sum(
            ops.mul(ops.reshape(weights, (batch_size, n_rows, 1)), memory), axis=1
        )
        return context, weights

    def encode(self, batch: Batch) -> EncodedDialog:
        q = self.encode_question(batch.question_ids, batch.question_mask)
        history = self.encode_history(
            batch.history_ids, batch.word_mask, batch.turn_mask, batch.turn_thetas
        )
        av = self.encode_modalities(batch.features, batch.feature_present)
        memory, memory_mask = self.build_memory(history, av)
        return EncodedDialog(
            q=q,
            history=history,
            av=av,
            theta=batch.theta,
            topic_vector=self.topic_vector(batch.theta),
            memory=memory,
            memory_mask=memory_mask,
            keys=None if memory is None else self.attention_keys(memory),
        )

    def initial_decoder_state(self, encoded: EncodedDialog) -> tuple[Tensor, Tensor]:
        parts = [encoded.q, encoded.history.h]
        if encoded.av is not None:
            parts.append(encoded.av)
        if encoded.topic_vector is not None:
            parts.append(encoded.topic_vector)
        h = ops.tanh(self.init(ops.concat(parts, axis=-1)))
        return h, Tensor(np.zeros(h.shape))

    def _context(self, h: Tensor, encoded: EncodedDialog) -> tuple[Tensor, np.ndarray | None]:
        batch_size = h.shape[0]
        if encoded.memory is None:
            return Tensor(np.zeros((batch_size, self.config.memory_dim))), None
        has_memory = encoded.memory_mask.any(axis=1)
        if has_memory.all():
            context, weights = self.attend(
                h, encoded.memory, encoded.memory_mask, keys=encoded.keys
            )
            return context, weights.value
        # rows without history fall back to a zero context
        safe_mask = encoded.memory_mask.copy()
        safe_mask[~has_memory, 0] = True
        context, weights = self.attend(h, encoded.memory, safe_mask, keys=encoded.keys)
        flags = has_memory.astype(np.float64)[:, None]
        return ops.mul(context, flags), weights.value * flags

    def decode_step(
        self,
        prev_ids,
        state: tuple[Tensor, Tensor],
        encoded: EncodedDialog,
    ) -> DecoderOutput:
        x = self.embedding(np.asarray(prev_ids, dtype=np.int64))
        if self.config.topic_mode == TopicModes.DECODER_FEATURE:
            if encoded.theta is None:
                raise InvalidModelArgument("decoder_feature mode needs topic vectors")
            x = ops.concat([x, encoded.theta], axis=-1)
        h, c = self.decoder_lstm.step(x, *state)
        context, weights = self._context(h, encoded)
        logits = self.output(ops.concat([h, context], axis=-1))
        return DecoderOutput(logits=logits, h=h, c=c, weights=weights)

    def forward_loss(self, batch: Batch) -> Tensor:
        """Teacher-forced mean cross-entropy over the batch's answer tokens"""
        if batch.n_target_tokens == 0:
            raise InvalidModelArgument("Batch has no answer tokens")
        encoded = self.encode(batch)
        state = self.initial_decoder_state(encoded)
        logits = []
        for step in range(batch.decoder_inputs.shape[1]):
            out = self.decode_step(batch.decoder_inputs[:, step], state, encoded)
            state = (out.h, out.c)
            logits.append(out.logits)
        return ops.cross_entropy(
            ops.stack(logits, axis=1), batch.targets, batch.target_mask
        )
