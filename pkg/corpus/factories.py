import factory
import numpy as np
from corpus.text import tokenize
from corpus.types import (
    Corpus,
    Dialog,
    FeatureTrack,
    SynthSpec,
    Turn,
)


class TurnFactory(factory.Factory):
    question = factory.Sequence(lambda n: tokenize(f"is he holding thing {n} ?"))
    answer = factory.Sequence(lambda n: tokenize(f"yes , thing {n} ."))
    turn_index = factory.Sequence(lambda n: n)

    class Meta:
        model = Turn


class FeatureTrackFactory(factory.Factory):
    modality = "audio"
    frames = factory.LazyFunction(lambda: np.eye(4, dtype=np.float32)[:2])

    class Meta:
        model = FeatureTrack


class DialogFactory(factory.Factory):
    dialog_id = factory.Sequence(lambda n: f"dialog-{n:04d}")
    caption = factory.LazyFunction(lambda: tokenize("a man is cooking ."))
    turns = factory.LazyFunction(
        lambda: tuple(TurnFactory(turn_index=idx) for idx in range(2))
    )
    features = factory.LazyFunction(dict)

    class Meta:
        model = Dialog


class CorpusFactory(factory.Factory):
    dialogs = factory.LazyFunction(
        lambda: tuple(DialogFactory() for _ in range(3))
    )

    class Meta:
        model = Corpus


class SynthSpecFactory(factory.Factory):
    n_dialogs = 4
    n_turns_per_dialog = 3
    n_topic_clusters = 2
    coref_dependency_gap = 0
    binary_fraction = 0.0
    audio_event_classes = 0
    rng_seed = 7

    class Meta:
        model = SynthSpec


def build_qa_dialog(dialog_id: str, qa_pairs: list[tuple[str, str]], **kwargs) -> Dialog:
    return DialogFactory(
        dialog_id=dialog_id,
        turns=tuple(
            Turn(tokenize(q), tokenize(a), idx)
            for idx, (q, a) in enumerate(qa_pairs)
        ),
        **kwargs,
    )
