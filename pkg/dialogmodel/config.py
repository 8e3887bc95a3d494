from dataclasses import (
    asdict,
    dataclass,
    field,
    fields,
)

from dialogmodel.constants import (
    AttentionVariants,
    DecodeModes,
    TopicModes,
)
from dialogmodel.exceptions import (
    ConfigMismatchError,
    InvalidModelArgument,
)
from django.conf import settings
from nnkit.constants import OptimizerKinds
from topics.constants import TopicSources


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    embedding_dim: int = 64
    word_hidden_dim: int = 128
    sentence_hidden_dim: int = 128
    question_hidden_dim: int = 128
    decoder_hidden_dim: int = 128
    modality_dims: dict[str, int] = field(default_factory=dict)
    modality_projection_dim: int = 64
    av_dim: int = 64
    attention_variant: str = AttentionVariants.SENT_ALL_STATES
    attention_dim: int | None = None
    topic_mode: str = TopicModes.NONE
    topic_count: int = 0
    topic_embedding_dim: int = 16
    topic_source: str = TopicSources.QUESTION_HISTORY
    train_embeddings: bool = True
    rng_seed: int = 0

    @classmethod
    def with_defaults(cls, vocab_size: int, **overrides) -> "ModelConfig":
        known = {item.name for item in fields(cls)}
        values = {
            key: value
            for key, value in settings.MODEL_DEFAULTS.items()
            if key in known
        }
        values.update(
            (key, value) for key, value in overrides.items() if value is not None
        )
        config = cls(vocab_size=vocab_size, **values)
        config.validate()
        return config

    @property
    def modalities(self) -> tuple[str, ...]:
        return tuple(sorted(self.modality_dims))

    @property
    def memory_dim(self) -> int:
        """Dimension of attention memory rows and of the context vector"""
        if self.attention_dim is not None:
            return self.attention_dim
        return self.natural_memory_dim

    @property
    def natural_memory_dim(self) -> int:
        if self.attention_variant in AttentionVariants.WORD_LEVEL:
            return self.word_hidden_dim
        return self.sentence_hidden_dim

    @property
    def uses_topics(self) -> bool:
        return self.topic_mode != TopicModes.NONE

    def validate(self):
        dims = [
            "vocab_size",
            "embedding_dim",
            "word_hidden_dim",
            "sentence_hidden_dim",
            "question_hidden_dim",
            "decoder_hidden_dim",
            "modality_projection_dim",
            "av_dim",
            "topic_embedding_dim",
        ]
        for name in dims:
            if getattr(self, name) < 1:
                raise InvalidModelArgument(f"{name} must be >= 1")
        if self.attention_dim is not None and self.attention_dim < 1:
            raise InvalidModelArgument("attention_dim must be >= 1")
        for modality, dim in self.modality_dims.items():
            if dim < 1:
                raise InvalidModelArgument(f"modality {modality}: dim must be >= 1")
        if self.attention_variant not in dict(AttentionVariants.CHOICES):
            raise InvalidModelArgument(
                f"Unknown attention variant {self.attention_variant}; valid: "
                + ", ".join(dict(AttentionVariants.CHOICES))
            )
        if self.topic_mode not in dict(TopicModes.CHOICES):
            raise InvalidModelArgument(
                f"Unknown topic mode {self.topic_mode}; valid: "
                + ", ".join(dict(TopicModes.CHOICES))
            )
        if self.topic_source not in dict(TopicSources.CHOICES):
            raise InvalidModelArgument(f"Unknown topic source {self.topic_source}")
        if self.uses_topics and self.topic_count < 1:
            raise InvalidModelArgument(
                f"topic_mode {self.topic_mode} needs topic_count >= 1"
            )
        if (
            self.attention_variant == AttentionVariants.SENT_ALL_STATES_PLUS_AV
            and not self.modality_dims
        ):
            raise InvalidModelArgument(
                "sent_all_states_plus_av needs at least one modality"
            )

    def to_dict(self) -> dict:
        data = asdict(self)
        data["modality_dims"] = dict(sorted(self.modality_dims.items()))
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        known = {item.name for item in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidModelArgument(f"Unknown model config keys: {unknown}")
        config = cls(**data)
        config.validate()
        return config

    def check_matches(self, other: "ModelConfig"):
        mine, theirs = self.to_dict(), other.to_dict()
        differing = {
            name: (mine[name], theirs[name])
            for name in mine
            if mine[name] != theirs[name]
        }
        if differing:
            raise ConfigMismatchError(differing)


@dataclass(frozen=True)
class DecodeOptions:
    mode: str = DecodeModes.GREEDY
    beam_width: int = 3
    max_length: int = 20
    length_penalty: float = 1.0
    dump_attention: bool = False

    @classmethod
    def with_defaults(cls, **overrides) -> "DecodeOptions":
        values = dict(settings.DECODE_DEFAULTS)
        values.update(
            (key, value) for key, value in overrides.items() if value is not None
        )
        options = cls(**values)
        options.validate()
        return options

    def validate(self):
        if self.mode not in dict(DecodeModes.CHOICES):
            raise InvalidModelArgument(f"Unknown decode mode {self.mode}")
        if self.beam_width < 1:
            raise InvalidModelArgument("beam_width must be >= 1")
        if self.max_length < 1:
            raise InvalidModelArgument("max_length must be >= 1")
        if not 0.0 <= self.length_penalty <= 1.0:
            raise InvalidModelArgument("length_penalty must be in [0, 1]")


@dataclass(frozen=True)
class TrainingOptions:
    optimizer: str = OptimizerKinds.ADAM
    learning_rate: float = 1e-3
    epochs: int = 30
    batch_size: int = 32
    checkpoint_every: int = 1
    rng_seed: int = 0

    @classmethod
    def with_defaults(cls, **overrides) -> "TrainingOptions":
        values = dict(settings.TRAINING_DEFAULTS)
        values.update(
            (key, value) for key, value in overrides.items() if value is not None
        )
        options = cls(**values)
        options.validate()
        return options

    def validate(self):
        if self.optimizer not in dict(OptimizerKinds.CHOICES):
            raise InvalidModelArgument(f"Unknown optimizer {self.optimizer}")
        if self.learning_rate < 0:
            raise InvalidModelArgument("learning_rate must be >= 0")
        if self.epochs < 0:
            raise InvalidModelArgument("epochs must be >= 0")
        if self.batch_size < 1:
            raise InvalidModelArgument("batch_size must be >= 1")
        if self.checkpoint_every < 0:
            raise InvalidModelArgument("checkpoint_every must be >= 0")
