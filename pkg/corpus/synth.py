"""Synthetic AVSD-like dialogs.

Each dialog picks one activity cluster, whose verbs, objects and places
make up its content words. Turns come in three kinds:

* intro turns ask what the person holds; the answer names a fresh object
* coreference turns (from turn `gap` on) ask about "it" and are answered
  from the object named `gap` turns earlier
* the audio turn (last turn, when audio classes are on) asks what can be
  heard; the answer is fixed by the one-hot class of the "audio" track
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from corpus.constants import SynthLexicon
from corpus.text import tokenize
from corpus.types import (
    Corpus,
    Dialog,
    FeatureTrack,
    SynthSpec,
    Turn,
)


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ActivityCluster:
    name: str
    verbs: tuple[str, ...]
    objects: tuple[str, ...]
    places: tuple[str, ...]

    @property
    def content_words(self) -> frozenset[str]:
        return frozenset(self.verbs + self.objects + self.places)


def activity_clusters(n_clusters: int) -> list[ActivityCluster]:
    """The first clusters come from the lexicon, further ones are generated"""
    clusters = [
        ActivityCluster(name, verbs, objects, places)
        for name, verbs, objects, places in SynthLexicon.CLUSTERS[:n_clusters]
    ]
    for idx in range(len(clusters), n_clusters):
        clusters.append(
            ActivityCluster(
                name=f"activity{idx}",
                verbs=tuple(f"doing{idx}x{j}" for j in range(3)),
                objects=tuple(f"thing{idx}x{j}" for j in range(4)),
                places=(f"room{idx}",),
            )
        )
    return clusters


def sound_classes(n_classes: int) -> list[str]:
    sounds = list(SynthLexicon.SOUNDS[:n_classes])
    sounds.extend(f"event {idx}" for idx in range(len(sounds), n_classes))
    return sounds


def object_color(cluster_index: int, object_index: int) -> str:
    colors = SynthLexicon.COLORS
    return colors[(cluster_index * 4 + object_index) % len(colors)]


def cluster_of(dialog: Dialog, clusters: list[ActivityCluster]) -> int | None:
    """Generating cluster of a synthetic dialog, read back from its caption"""
    words = set(dialog.caption)
    for idx, cluster in enumerate(clusters):
        if words & cluster.content_words:
            return idx
    return None


def synthesize_corpus(spec: SynthSpec) -> Corpus:
    spec.validate()
    rng = np.random.default_rng(spec.rng_seed)
    clusters = activity_clusters(max(spec.n_topic_clusters, 1))
    sounds = sound_classes(spec.audio_event_classes)
    n_turns = spec.n_turns_per_dialog
    has_audio = spec.audio_event_classes > 0
    audio_turn = n_turns - 1 if has_audio else None

    n_text_questions = spec.n_dialogs * (n_turns - (1 if has_audio else 0))
    n_binary = int(math.floor(spec.binary_fraction * n_text_questions + 0.5))
    binary_slots = set(int(i) for i in rng.permutation(n_text_questions)[:n_binary])

    dialogs = []
    slot = 0
    for dialog_index in range(spec.n_dialogs):
        cluster_index = int(rng.integers(len(clusters)))
        cluster = clusters[cluster_index]
        person, pronoun = SynthLexicon.PERSONS[int(rng.integers(2))]
        verb = cluster.verbs[int(rng.integers(len(cluster.verbs)))]
        place = cluster.places[int(rng.integers(len(cluster.places)))]
        caption = tokenize(f"a {person} is {verb} in the {place} .")

        objects: list[int] = []
        turns = []
        features = {}
        for turn_index in range(n_turns):
            if turn_index == audio_turn:
                event = int(rng.integers(spec.audio_event_classes))
                frames = np.zeros(
                    (spec.audio_frames, spec.audio_event_classes), dtype=np.float32
                )
                frames[:, event] = 1.0
                features["audio"] = FeatureTrack(modality="audio", frames=frames)
                question = SynthLexicon.AUDIO_QUESTION
                answer = f"i hear {sounds[event]}"
                objects.append(objects[-1] if objects else 0)
            else:
                binary = slot in binary_slots
                slot += 1
                gap = spec.coref_dependency_gap
                if gap > 0 and turn_index >= gap:
                    obj = objects[turn_index - gap]
                    question, answer = _coreference_qa(
                        rng, cluster, cluster_index, obj, binary
                    )
                else:
                    obj = int(rng.integers(len(cluster.objects)))
                    question, answer = _intro_qa(
                        rng, cluster, obj, person, pronoun, binary
                    )
                objects.append(obj)
            turns.append(
                Turn(
                    question=tokenize(question),
                    answer=tokenize(answer),
                    turn_index=turn_index,
                )
            )

        dialogs.append(
            Dialog(
                dialog_id=f"synth-{dialog_index:05d}",
                caption=caption,
                turns=tuple(turns),
                features=features,
            )
        )

    logger.info(
        "Synthesized %d dialogs (%d binary questions, seed %d)",
        len(dialogs),
        n_binary,
        spec.rng_seed,
    )
    return Corpus(tuple(dialogs))


def _intro_qa(
    rng: np.random.Generator,
    cluster: ActivityCluster,
    obj: int,
    person: str,
    pronoun: str,
    binary: bool,
) -> tuple[str, str]:
    name = cluster.objects[obj]
    if not binary:
        return (
            f"what is the {person} holding ?",
            f"{pronoun} is holding the {name} .",
        )
    if rng.random() < 0.5:
        asked = name
    else:
        others = [o for o in cluster.objects if o != name]
        asked = others[int(rng.integers(len(others)))]
    polarity = "yes" if asked == name else "no"
    return (
        f"is the {person} holding the {asked} ?",
        f"{polarity} , {pronoun} is holding the {name} .",
    )


def _coreference_qa(
    rng: np.random.Generator,
    cluster: ActivityCluster,
    cluster_index: int,
    obj: int,
    binary: bool,
) -> tuple[str, str]:
    name = cluster.objects[obj]
    color = object_color(cluster_index, obj)
    if not binary:
        return "what color is it ?", f"the {name} is {color} ."
    if rng.random() < 0.5:
        asked = color
    else:
        others = [c for c in SynthLexicon.COLORS if c != color]
        asked = others[int(rng.integers(len(others)))]
    polarity = "yes" if asked == color else "no"
    return f"is it {asked} ?", f"{polarity} , the {name} is {color} ."
