"""Run configs of the management commands.

A run config is a JSON object; command-line flags are merged on top before
validation. Nested blocks left out of the JSON validate as `{}` so their
defaults apply. The run-wide `rng_seed` is the only seed: nested blocks do
not accept one.
"""
import json
from pathlib import Path

from corpus.serializers import (
    StrictSerializer,
    SynthSpecSerializer,
)
from dialogmodel.serializers import (
    DecodeOptionsSerializer,
    ModelConfigSerializer,
    TrainingOptionsSerializer,
)
from django.conf import settings
from experiments.constants import (
    TOPIC_COUNT_SWEEP,
    Presets,
)
from experiments.presets import build_preset
from metrics.serializers import EvaluateOptionsSerializer
from rest_framework import serializers
from topics.serializers import (
    SeedSetsField,
    TopicParamsSerializer,
)


class PathField(serializers.CharField):
    """Path to an input that must exist when the config is validated"""

    default_error_messages = {"missing": "No such file or directory: {path}."}

    def __init__(self, directory: bool = False, **kwargs):
        self.directory = directory
        super().__init__(**kwargs)

    def to_internal_value(self, data) -> str:
        value = super().to_internal_value(data)
        path = Path(value)
        exists = path.is_dir() if self.directory else path.is_file()
        if not exists:
            self.fail("missing", path=value)
        return value


def optional_path(**kwargs) -> PathField:
    return PathField(required=False, allow_null=True, default=None, **kwargs)


class SynthBlockSerializer(SynthSpecSerializer):
    rng_seed = None


class TopicBlockSerializer(TopicParamsSerializer):
    rng_seed = None


class RunConfigSerializer(StrictSerializer):
    blocks: tuple[str, ...] = ()
    input_fields: tuple[str, ...] = ()

    out = serializers.CharField()
    rng_seed = serializers.IntegerField(min_value=0, default=0)
    force = serializers.BooleanField(default=False)

    def to_internal_value(self, data):
        if isinstance(data, dict):
            data = {**{name: {} for name in self.blocks}, **data}
        return super().to_internal_value(data)

    def validate(self, attrs: dict) -> dict:
        out = attrs.get("out")
        if out is None:
            return attrs
        out = Path(out).resolve()
        inside = [
            name
            for name in self.input_fields
            if attrs.get(name) and out in Path(attrs[name]).resolve().parents
        ]
        if inside:
            raise serializers.ValidationError(
                {name: ["Input lies inside the output directory."] for name in inside}
            )
        return attrs

    def resolved(self) -> dict:
        """The validated config as written to the run's config echo"""
        data = dict(self.data)
        data.pop("force", None)
        return data


class CorpusInputSerializer(RunConfigSerializer):
    input_fields = ("corpus",)

    corpus = PathField()
    feature_dirs = serializers.DictField(
        child=PathField(directory=True), required=False, default=dict
    )


class SynthRunSerializer(RunConfigSerializer):
    blocks = ("spec",)

    spec = SynthBlockSerializer()


class TopicsRunSerializer(CorpusInputSerializer):
    blocks = ("params",)
    input_fields = ("corpus", "seeds")

    seeds = optional_path()
    params = TopicBlockSerializer()

    def validate(self, attrs: dict) -> dict:
        attrs = super().validate(attrs)
        if attrs.get("seeds"):
            try:
                raw = json.loads(Path(attrs["seeds"]).read_text())
                seed_sets = SeedSetsField().run_validation(raw)
            except (json.JSONDecodeError, UnicodeDecodeError):
                raise serializers.ValidationError({"seeds": ["Not a JSON file."]})
            except serializers.ValidationError as e:
                raise serializers.ValidationError({"seeds": e.detail})
            K = attrs["params"]["K"]
            bad = sorted(topic for topic in seed_sets if not 0 <= topic < K)
            if bad:
                raise serializers.ValidationError(
                    {"seeds": [f"Seed topics {bad} out of range for K={K}."]}
                )
            attrs["params"]["seed_sets"] = {**attrs["params"]["seed_sets"], **seed_sets}
        return attrs


class TrainRunSerializer(CorpusInputSerializer):
    blocks = ("model", "training")
    input_fields = ("corpus", "val_corpus", "topic_model", "word_vectors", "resume")

    val_corpus = optional_path()
    val_fraction = serializers.FloatField(
        min_value=0.0, max_value=0.95, default=settings.CORPUS_DEFAULTS["val_fraction"]
    )
    topic_model = optional_path()
    word_vectors = optional_path()
    resume = optional_path()
    fold_in_iterations = serializers.IntegerField(
        min_value=0, default=settings.TOPIC_DEFAULTS["fold_in_iterations"]
    )
    model = ModelConfigSerializer()
    training = TrainingOptionsSerializer()


class GenerateRunSerializer(CorpusInputSerializer):
    blocks = ("decode",)
    input_fields = ("corpus", "checkpoint", "topic_model", "vocab")

    checkpoint = PathField()
    topic_model = optional_path()
    vocab = optional_path()
    fold_in_iterations = serializers.IntegerField(
        min_value=0, default=settings.TOPIC_DEFAULTS["fold_in_iterations"]
    )
    decode = DecodeOptionsSerializer()


class EvaluateRunSerializer(EvaluateOptionsSerializer, CorpusInputSerializer):
    input_fields = ("corpus", "hypotheses")

    hypotheses = PathField()


class GradcheckRunSerializer(RunConfigSerializer):
    out = serializers.CharField(required=False, allow_null=True, default=None)
    eps = serializers.FloatField(
        min_value=0.0, default=settings.GRADCHECK_DEFAULTS["eps"]
    )
    tolerance = serializers.FloatField(
        min_value=0.0, default=settings.GRADCHECK_DEFAULTS["tolerance"]
    )
    coordinates_per_parameter = serializers.IntegerField(
        min_value=1,
        allow_null=True,
        default=settings.GRADCHECK_DEFAULTS["coordinates_per_parameter"],
    )
    inject_fault = serializers.BooleanField(default=False)


class CompareRunSerializer(RunConfigSerializer):
    blocks = ("synth", "topics", "model", "training")
    input_fields = ("word_vectors",)

    preset = serializers.ChoiceField(choices=Presets.CHOICES)
    seeds = serializers.ListField(
        child=serializers.IntegerField(min_value=0), required=False, allow_empty=False
    )
    n_seeds = serializers.IntegerField(min_value=1, default=5)
    val_fraction = serializers.FloatField(
        min_value=0.05, max_value=0.95, default=settings.CORPUS_DEFAULTS["val_fraction"]
    )
    topic_counts = serializers.ListField(
        child=serializers.IntegerField(min_value=1),
        allow_empty=False,
        default=lambda: list(TOPIC_COUNT_SWEEP),
    )
    word_vectors = optional_path()
    fold_in_iterations = serializers.IntegerField(
        min_value=0, default=settings.TOPIC_DEFAULTS["fold_in_iterations"]
    )
    synth = SynthBlockSerializer()
    topics = TopicBlockSerializer()
    model = ModelConfigSerializer()
    training = TrainingOptionsSerializer()

    def validate(self, attrs: dict) -> dict:
        attrs = super().validate(attrs)
        initial = self.initial_data if isinstance(self.initial_data, dict) else {}
        explicit_synth = set(initial.get("synth") or {})
        preset = build_preset(attrs["preset"], attrs["topic_counts"])
        for key, value in preset.synth_defaults.items():
            if key not in explicit_synth:
                attrs["synth"][key] = value
        spec = attrs["synth"]
        n_turns = spec["n_turns_per_dialog"]
        if n_turns > 0 and spec["coref_dependency_gap"] >= n_turns:
            raise serializers.ValidationError(
                {"synth": {"coref_dependency_gap": ["Must be smaller than n_turns_per_dialog."]}}
            )
        if "K" not in (initial.get("topics") or {}):
            attrs["topics"]["K"] = max(spec["n_topic_clusters"], 1)
        if "seeds" not in attrs:
            attrs["seeds"] = [attrs["rng_seed"] + offset for offset in range(attrs["n_seeds"])]
        return attrs
