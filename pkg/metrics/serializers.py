from corpus.serializers import StrictSerializer
from metrics.constants import Subsets
from rest_framework import serializers


class GenerationRecordSerializer(StrictSerializer):
    dialog_id = serializers.CharField()
    turn_index = serializers.IntegerField(min_value=0)
    question = serializers.CharField(allow_blank=True, trim_whitespace=False)
    reference = serializers.CharField(allow_blank=True, trim_whitespace=False)
    # an empty hypothesis is a valid generation
    hypothesis = serializers.CharField(allow_blank=True, trim_whitespace=False)
    attention_weights = serializers.ListField(required=False)


class EvaluateOptionsSerializer(StrictSerializer):
    subsets = serializers.ListField(
        child=serializers.ChoiceField(choices=Subsets.CHOICES),
        required=False,
        default=list,
    )

    def validate_subsets(self, value: list[str]) -> list[str]:
        return list(dict.fromkeys(value))
