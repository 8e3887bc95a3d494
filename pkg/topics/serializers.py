from corpus.serializers import StrictSerializer
from django.conf import settings
from rest_framework import serializers
from topics.constants import TopicCategories
from topics.lda import TopicParams


class SeedSetsField(serializers.DictField):
    """JSON map {topic_index: [words]}; keys arrive as strings"""

    child = serializers.ListField(child=serializers.CharField())

    def to_internal_value(self, data):
        data = super().to_internal_value(data)
        seed_sets = {}
        for key, words in data.items():
            try:
                topic = int(key)
            except ValueError:
                raise serializers.ValidationError(
                    f"Seed topic {key!r} is not an integer."
                )
            seed_sets[topic] = tuple(words)
        return seed_sets


class TopicParamsSerializer(StrictSerializer):
    K = serializers.IntegerField(
        min_value=1, default=settings.TOPIC_DEFAULTS["K"]
    )
    alpha = serializers.FloatField(
        min_value=0.0, required=False, allow_null=True, default=None
    )
    beta = serializers.FloatField(
        min_value=0.0, default=settings.TOPIC_DEFAULTS["beta"]
    )
    n_iterations = serializers.IntegerField(
        min_value=0, default=settings.TOPIC_DEFAULTS["n_iterations"]
    )
    seed_sets = SeedSetsField(required=False, default=dict)
    seed_confidence = serializers.FloatField(
        min_value=0.0,
        max_value=1.0,
        default=settings.TOPIC_DEFAULTS["seed_confidence"],
    )
    rng_seed = serializers.IntegerField(
        min_value=0, default=settings.TOPIC_DEFAULTS["rng_seed"]
    )
    category = serializers.ChoiceField(
        choices=TopicCategories.CHOICES,
        default=settings.TOPIC_DEFAULTS["category"],
    )
    top_n = serializers.IntegerField(
        min_value=1, default=settings.TOPIC_DEFAULTS["top_n"]
    )

    def validate(self, attrs: dict) -> dict:
        errors = {}
        if attrs.get("alpha") is not None and attrs["alpha"] <= 0:
            errors["alpha"] = ["Must be positive."]
        if attrs["beta"] <= 0:
            errors["beta"] = ["Must be positive."]
        bad_topics = sorted(
            topic
            for topic in attrs.get("seed_sets", {})
            if not 0 <= topic < attrs["K"]
        )
        if bad_topics:
            errors["seed_sets"] = [
                f"Seed topics {bad_topics} out of range for K={attrs['K']}."
            ]
        if errors:
            raise serializers.ValidationError(errors)
        return attrs

    def create(self, validated_data: dict) -> TopicParams:
        return TopicParams.with_defaults(
            K=validated_data["K"],
            alpha=validated_data.get("alpha"),
            beta=validated_data["beta"],
            n_iterations=validated_data["n_iterations"],
            seed_sets=validated_data.get("seed_sets", {}),
            seed_confidence=validated_data["seed_confidence"],
            rng_seed=validated_data["rng_seed"],
        )
