from corpus.serializers import StrictSerializer
from dialogmodel.config import (
    DecodeOptions,
    TrainingOptions,
)
from dialogmodel.constants import (
    AttentionVariants,
    DecodeModes,
    TopicModes,
)
from django.conf import settings
from nnkit.constants import OptimizerKinds
from rest_framework import serializers
from topics.constants import TopicSources


def choice_field(choices, default) -> serializers.ChoiceField:
    names = ", ".join(dict(choices))
    return serializers.ChoiceField(
        choices=choices,
        default=default,
        error_messages={
            "invalid_choice": f'"{{input}}" is not a valid choice. Valid names: {names}.'
        },
    )


class ModelConfigSerializer(StrictSerializer):
    """Model hyperparameters of a run config.

    Vocabulary size, modality dims and topic count come from the corpus and
    the topic model, so they are not part of the JSON.
    """

    embedding_dim = serializers.IntegerField(
        min_value=1, default=settings.MODEL_DEFAULTS["embedding_dim"]
    )
    word_hidden_dim = serializers.IntegerField(
        min_value=1, default=settings.MODEL_DEFAULTS["word_hidden_dim"]
    )
    sentence_hidden_dim = serializers.IntegerField(
        min_value=1, default=settings.MODEL_DEFAULTS["sentence_hidden_dim"]
    )
    question_hidden_dim = serializers.IntegerField(
        min_value=1, default=settings.MODEL_DEFAULTS["question_hidden_dim"]
    )
    decoder_hidden_dim = serializers.IntegerField(
        min_value=1, default=settings.MODEL_DEFAULTS["decoder_hidden_dim"]
    )
    modality_projection_dim = serializers.IntegerField(
        min_value=1, default=settings.MODEL_DEFAULTS["modality_projection_dim"]
    )
    av_dim = serializers.IntegerField(
        min_value=1, default=settings.MODEL_DEFAULTS["av_dim"]
    )
    topic_embedding_dim = serializers.IntegerField(
        min_value=1, default=settings.MODEL_DEFAULTS["topic_embedding_dim"]
    )
    attention_dim = serializers.IntegerField(
        min_value=1, required=False, allow_null=True, default=None
    )
    attention_variant = choice_field(
        AttentionVariants.CHOICES, settings.MODEL_DEFAULTS["attention_variant"]
    )
    topic_mode = choice_field(
        TopicModes.CHOICES, settings.MODEL_DEFAULTS["topic_mode"]
    )
    topic_source = choice_field(
        TopicSources.CHOICES, settings.MODEL_DEFAULTS["topic_source"]
    )
    train_embeddings = serializers.BooleanField(
        default=settings.MODEL_DEFAULTS["train_embeddings"]
    )


class TrainingOptionsSerializer(StrictSerializer):
    optimizer = choice_field(
        OptimizerKinds.CHOICES, settings.TRAINING_DEFAULTS["optimizer"]
    )
    learning_rate = serializers.FloatField(
        min_value=0.0, default=settings.TRAINING_DEFAULTS["learning_rate"]
    )
    epochs = serializers.IntegerField(
        min_value=0, default=settings.TRAINING_DEFAULTS["epochs"]
    )
    batch_size = serializers.IntegerField(
        min_value=1, default=settings.TRAINING_DEFAULTS["batch_size"]
    )
    checkpoint_every = serializers.IntegerField(
        min_value=0, default=settings.TRAINING_DEFAULTS["checkpoint_every"]
    )

    def create(self, validated_data: dict) -> TrainingOptions:
        return TrainingOptions(**validated_data)


class DecodeOptionsSerializer(StrictSerializer):
    mode = choice_field(DecodeModes.CHOICES, settings.DECODE_DEFAULTS["mode"])
    beam_width = serializers.IntegerField(
        min_value=1, default=settings.DECODE_DEFAULTS["beam_width"]
    )
    max_length = serializers.IntegerField(
        min_value=1, default=settings.DECODE_DEFAULTS["max_length"]
    )
    length_penalty = serializers.FloatField(
        min_value=0.0,
        max_value=1.0,
        default=settings.DECODE_DEFAULTS["length_penalty"],
    )
    dump_attention = serializers.BooleanField(default=False)

    def create(self, validated_data: dict) -> DecodeOptions:
        return DecodeOptions(**validated_data)
