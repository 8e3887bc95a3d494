from django.conf import settings
from rest_framework import serializers


class StrictSerializer(serializers.Serializer):
    """Serializer that rejects keys it does not declare"""

    def to_internal_value(self, data):
        if isinstance(data, dict):
            unknown = sorted(set(data) - set(self.fields))
            if unknown:
                raise serializers.ValidationError(
                    {key: ["Unknown field."] for key in unknown}
                )
        return super().to_internal_value(data)


class AVSDTurnSerializer(serializers.Serializer):
    # blank strings are allowed here; empty turns are rejected after
    # tokenization with the turn index in the message
    question = serializers.CharField(allow_blank=True, trim_whitespace=False)
    answer = serializers.CharField(allow_blank=True, trim_whitespace=False)


class AVSDDialogSerializer(serializers.Serializer):
    image_id = serializers.CharField()
    caption = serializers.CharField(
        required=False, allow_blank=True, allow_null=True
    )
    summary = serializers.CharField(
        required=False, allow_blank=True, allow_null=True
    )
    dialog = AVSDTurnSerializer(many=True)


class CorpusTurnSerializer(StrictSerializer):
    question = serializers.ListField(child=serializers.CharField())
    answer = serializers.ListField(child=serializers.CharField())


class CorpusLineSerializer(StrictSerializer):
    dialog_id = serializers.CharField()
    caption = serializers.ListField(
        child=serializers.CharField(), allow_empty=True
    )
    turns = CorpusTurnSerializer(many=True, allow_empty=False)
    features = serializers.DictField(
        child=serializers.CharField(), required=False, default=dict
    )


class SynthSpecSerializer(StrictSerializer):
    n_dialogs = serializers.IntegerField(
        min_value=0, default=settings.SYNTH_DEFAULTS["n_dialogs"]
    )
    n_turns_per_dialog = serializers.IntegerField(
        min_value=0, default=settings.SYNTH_DEFAULTS["n_turns_per_dialog"]
    )
    n_topic_clusters = serializers.IntegerField(
        min_value=0, default=settings.SYNTH_DEFAULTS["n_topic_clusters"]
    )
    coref_dependency_gap = serializers.IntegerField(
        min_value=0, default=settings.SYNTH_DEFAULTS["coref_dependency_gap"]
    )
    binary_fraction = serializers.FloatField(
        min_value=0.0,
        max_value=1.0,
        default=settings.SYNTH_DEFAULTS["binary_fraction"],
    )
    audio_event_classes = serializers.IntegerField(
        min_value=0, default=settings.SYNTH_DEFAULTS["audio_event_classes"]
    )
    audio_frames = serializers.IntegerField(
        min_value=1, default=settings.SYNTH_DEFAULTS["audio_frames"]
    )
    rng_seed = serializers.IntegerField(
        min_value=0, default=settings.SYNTH_DEFAULTS["rng_seed"]
    )

    def validate(self, attrs: dict) -> dict:
        n_turns = attrs["n_turns_per_dialog"]
        if n_turns > 0 and attrs["coref_dependency_gap"] >= n_turns:
            raise serializers.ValidationError(
                {
                    "coref_dependency_gap": [
                        "Must be smaller than n_turns_per_dialog."
                    ]
                }
            )
        return attrs
