"""Comparison presets: the arms each A/B experiment trains.

Each preset names a reference arm; the summary counts, per measure, the
seeds on which another arm beats it.
"""
from dataclasses import (
    dataclass,
    field,
)

from dialogmodel.constants import (
    AttentionVariants,
    TopicModes,
)
from experiments.constants import (
    TOPIC_COUNT_SWEEP,
    Presets,
    TopicKinds,
)
from experiments.exceptions import ExperimentError


@dataclass(frozen=True)
class Arm:
    name: str
    model: dict = field(default_factory=dict)
    topics: str = TopicKinds.NONE
    topic_count: int | None = None
    use_audio: bool = True
    word_vectors: bool = False


@dataclass(frozen=True)
class Preset:
    name: str
    arms: tuple[Arm, ...]
    reference: str
    synth_defaults: dict = field(default_factory=dict)

    def arm(self, name: str) -> Arm:
        for arm in self.arms:
            if arm.name == name:
                return arm
        raise ExperimentError(f"Preset {self.name} has no arm {name}")


def _topic_arm(name: str, mode: str, kind: str = TopicKinds.GUIDED, **kwargs) -> Arm:
    return Arm(name=name, model={"topic_mode": mode}, topics=kind, **kwargs)


def build_preset(name: str, topic_counts=TOPIC_COUNT_SWEEP) -> Preset:
    if name == Presets.ATTENTION:
        return Preset(
            name=name,
            arms=tuple(
                Arm(name=variant, model={"attention_variant": variant})
                for variant, _ in AttentionVariants.CHOICES
            ),
            reference=AttentionVariants.NO_ATTENTION,
            synth_defaults={"coref_dependency_gap": 2, "binary_fraction": 0.5},
        )
    if name == Presets.TOPICS:
        return Preset(
            name=name,
            arms=(
                Arm(name="no_topics"),
                _topic_arm("lda", TopicModes.DECODER_FEATURE, TopicKinds.LDA),
                _topic_arm("guided_lda", TopicModes.DECODER_FEATURE),
                _topic_arm(
                    "guided_lda_vectors", TopicModes.DECODER_FEATURE, word_vectors=True
                ),
                _topic_arm("topic_embedding", TopicModes.TOPIC_EMBEDDING),
                _topic_arm("history_feature", TopicModes.HISTORY_FEATURE),
            ),
            reference="no_topics",
        )
    if name == Presets.AUDIO:
        return Preset(
            name=name,
            arms=(Arm(name="no_audio", use_audio=False), Arm(name="audio")),
            reference="no_audio",
            synth_defaults={"audio_event_classes": 4},
        )
    if name == Presets.TOPIC_COUNT:
        arms = tuple(
            _topic_arm(f"k{count}", TopicModes.DECODER_FEATURE, topic_count=count)
            for count in topic_counts
        )
        return Preset(name=name, arms=arms, reference=arms[0].name)
    raise ExperimentError(f"Unknown preset {name}")
