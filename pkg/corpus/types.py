from collections.abc import (
    Iterator,
    Mapping,
)
from dataclasses import (
    dataclass,
    field,
)

import numpy as np
from corpus.exceptions import (
    CorpusError,
    IngestionError,
    InvalidSynthSpec,
)


Tokens = tuple[str, ...]


@dataclass(frozen=True)
class Turn:
    question: Tokens
    answer: Tokens
    turn_index: int

    def __post_init__(self):
        if not self.question:
            raise IngestionError(f"Turn {self.turn_index}: empty question")
        if not self.answer:
            raise IngestionError(f"Turn {self.turn_index}: empty answer")


@dataclass(frozen=True, eq=False)
class FeatureTrack:
    """Precomputed per-segment features of one modality (frames x dim)"""

    modality: str
    frames: np.ndarray

    def __post_init__(self):
        frames = np.array(self.frames, dtype=np.float32)
        if frames.ndim != 2 or frames.shape[0] < 1 or frames.shape[1] < 1:
            raise CorpusError(
                f"Track {self.modality}: expected a non-empty frames x dim "
                f"matrix, got shape {frames.shape}"
            )
        if not np.isfinite(frames).all():
            raise CorpusError(f"Track {self.modality}: non-finite value")
        frames.setflags(write=False)
        object.__setattr__(self, "frames", frames)

    @property
    def dim(self) -> int:
        return int(self.frames.shape[1])

    @property
    def n_frames(self) -> int:
        return int(self.frames.shape[0])

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeatureTrack):
            return NotImplemented
        return self.modality == other.modality and np.array_equal(
            self.frames, other.frames
        )


@dataclass(frozen=True)
class Dialog:
    dialog_id: str
    caption: Tokens
    turns: tuple[Turn, ...]
    features: Mapping[str, FeatureTrack] = field(default_factory=dict)

    def __post_init__(self):
        if not self.turns:
            raise IngestionError(f"Dialog {self.dialog_id}: no turns")
        for previous, turn in zip(self.turns, self.turns[1:]):
            if turn.turn_index <= previous.turn_index:
                raise IngestionError(
                    f"Dialog {self.dialog_id}: turn index {turn.turn_index} "
                    f"does not follow {previous.turn_index}"
                )
        for modality, track in self.features.items():
            if modality != track.modality:
                raise IngestionError(
                    f"Dialog {self.dialog_id}: track {track.modality} "
                    f"stored under {modality}"
                )


@dataclass(frozen=True)
class Corpus:
    dialogs: tuple[Dialog, ...]

    def __iter__(self) -> Iterator[Dialog]:
        return iter(self.dialogs)

    def __len__(self) -> int:
        return len(self.dialogs)

    def __getitem__(self, index: int) -> Dialog:
        return self.dialogs[index]

    def token_sequences(self) -> Iterator[Tokens]:
        for dialog in self.dialogs:
            if dialog.caption:
                yield dialog.caption
            for turn in dialog.turns:
                yield turn.question
                yield turn.answer

    def n_turns(self) -> int:
        return sum(len(dialog.turns) for dialog in self.dialogs)

    def modality_dims(self) -> dict[str, int]:
        """Feature dimension per modality, constant across the corpus"""
        dims: dict[str, int] = {}
        for dialog in self.dialogs:
            for modality, track in dialog.features.items():
                expected = dims.setdefault(modality, track.dim)
                if expected != track.dim:
                    raise CorpusError(
                        f"Dialog {dialog.dialog_id}: {modality} track has "
                        f"dim {track.dim}, corpus uses {expected}"
                    )
        return dict(sorted(dims.items()))


@dataclass(frozen=True)
class SynthSpec:
    n_dialogs: int
    n_turns_per_dialog: int
    n_topic_clusters: int
    coref_dependency_gap: int = 0
    binary_fraction: float = 0.0
    audio_event_classes: int = 0
    rng_seed: int = 0
    audio_frames: int = 4

    def validate(self):
        for name in (
            "n_dialogs",
            "n_turns_per_dialog",
            "n_topic_clusters",
            "coref_dependency_gap",
            "audio_event_classes",
        ):
            if getattr(self, name) < 0:
                raise InvalidSynthSpec(name, "must be >= 0")
        if self.audio_frames < 1:
            raise InvalidSynthSpec("audio_frames", "must be >= 1")
        if not 0.0 <= self.binary_fraction <= 1.0:
            raise InvalidSynthSpec("binary_fraction", "must be in [0, 1]")
        if (
            self.n_turns_per_dialog > 0
            and self.coref_dependency_gap >= self.n_turns_per_dialog
        ):
            raise InvalidSynthSpec(
                "coref_dependency_gap", "must be < n_turns_per_dialog"
            )
        if self.n_dialogs > 0 and self.n_turns_per_dialog < 1:
            raise InvalidSynthSpec(
                "n_turns_per_dialog", "dialogs need at least one turn"
            )
