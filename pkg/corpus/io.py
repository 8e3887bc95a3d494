import json
import logging
import struct
from pathlib import Path

import numpy as np
from corpus.constants import (
    FTRK_HEADER_FORMAT,
    FTRK_MAGIC,
    FTRK_VERSION,
)
from corpus.exceptions import (
    AVSDParseError,
    AVSDSchemaError,
    CorpusError,
    FeatureTrackFormatError,
    IngestionError,
    InvalidCorpusArgument,
    WordVectorFormatError,
)
from corpus.serializers import (
    AVSDDialogSerializer,
    CorpusLineSerializer,
)
from corpus.text import (
    Vocab,
    tokenize,
)
from corpus.types import (
    Corpus,
    Dialog,
    FeatureTrack,
    Turn,
)
from django.conf import settings


logger = logging.getLogger(__name__)

_FTRK_HEADER_SIZE = struct.calcsize(FTRK_HEADER_FORMAT)


def load_avsd_json(
    path: str | Path, feature_dirs: dict[str, str | Path] | None = None
) -> Corpus:
    """Read an AVSD-style release file.

    `feature_dirs` maps a modality to a directory holding
    `<image_id>.ftrk` tracks; dialogs without a file simply lack that
    modality.
    """
    raw = Path(path).read_bytes()
    try:
        data = json.loads(raw.decode("utf-8"))
    except UnicodeDecodeError as e:
        raise AVSDParseError(f"Invalid UTF-8 in {path}", e.start) from e
    except json.JSONDecodeError as e:
        offset = len(e.doc[: e.pos].encode("utf-8"))
        raise AVSDParseError(f"Malformed JSON in {path}: {e.msg}", offset) from e

    if not isinstance(data, dict) or not isinstance(data.get("dialogs"), list):
        raise AVSDSchemaError("<file>", 'Expected an object with a "dialogs" array')

    dialogs = []
    for position, entry in enumerate(data["dialogs"]):
        dialog_id = (
            str(entry.get("image_id", f"#{position}"))
            if isinstance(entry, dict)
            else f"#{position}"
        )
        serializer = AVSDDialogSerializer(data=entry)
        if not serializer.is_valid():
            raise AVSDSchemaError(dialog_id, serializer.errors)
        values = serializer.validated_data

        caption_text = values.get("caption") or values.get("summary") or ""
        turns = []
        for turn_index, qa in enumerate(values["dialog"]):
            try:
                turns.append(
                    Turn(
                        question=tokenize(qa["question"]),
                        answer=tokenize(qa["answer"]),
                        turn_index=turn_index,
                    )
                )
            except IngestionError as e:
                raise IngestionError(f"Dialog {dialog_id}: {e}") from e

        features = {}
        for modality, directory in (feature_dirs or {}).items():
            track_path = Path(directory) / f"{values['image_id']}.ftrk"
            if track_path.exists():
                features[modality] = load_feature_track(track_path, modality)

        dialogs.append(
            Dialog(
                dialog_id=values["image_id"],
                caption=tokenize(caption_text),
                turns=tuple(turns),
                features=features,
            )
        )

    logger.info("Loaded %d dialogs from %s", len(dialogs), path)
    return Corpus(tuple(dialogs))


def load_feature_track(path: str | Path, modality: str | None = None) -> FeatureTrack:
    data = Path(path).read_bytes()
    if len(data) < _FTRK_HEADER_SIZE:
        raise FeatureTrackFormatError("Truncated header", len(data))
    magic, version, dim, n_frames = struct.unpack_from(FTRK_HEADER_FORMAT, data)
    if magic != FTRK_MAGIC:
        raise FeatureTrackFormatError(f"Bad magic {magic!r}", 0)
    if version != FTRK_VERSION:
        raise FeatureTrackFormatError(f"Unsupported version {version}", 4)
    if dim < 1:
        raise FeatureTrackFormatError("dim must be positive", 8)
    if n_frames < 1:
        raise FeatureTrackFormatError("frames must be positive", 12)

    expected = _FTRK_HEADER_SIZE + n_frames * dim * 4
    if len(data) < expected:
        raise FeatureTrackFormatError(
            f"Truncated payload: expected {expected} bytes, got {len(data)}",
            len(data),
        )
    if len(data) > expected:
        raise FeatureTrackFormatError("Trailing bytes after payload", expected)

    values = np.frombuffer(data, dtype="<f4", offset=_FTRK_HEADER_SIZE)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise FeatureTrackFormatError(
            "Non-finite value", _FTRK_HEADER_SIZE + 4 * int(bad[0])
        )
    frames = values.reshape(n_frames, dim).astype(np.float32)
    return FeatureTrack(modality=modality or Path(path).parent.name, frames=frames)


def save_feature_track(track: FeatureTrack, path: str | Path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = struct.pack(
        FTRK_HEADER_FORMAT, FTRK_MAGIC, FTRK_VERSION, track.dim, track.n_frames
    )
    path.write_bytes(header + track.frames.astype("<f4").tobytes())


def dialog_to_record(dialog: Dialog, track_paths: dict[str, str]) -> dict:
    return {
        "dialog_id": dialog.dialog_id,
        "caption": list(dialog.caption),
        "turns": [
            {"question": list(turn.question), "answer": list(turn.answer)}
            for turn in dialog.turns
        ],
        "features": track_paths,
    }


def save_corpus_jsonl(corpus: Corpus, path: str | Path) -> Path:
    """Write one dialog per line; tracks go under `features/<modality>/`
    next to the corpus file and are referenced by relative path.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    features_dir = settings.CORPUS_DEFAULTS["features_dirname"]
    lines = []
    for dialog in corpus:
        track_paths = {}
        for modality, track in sorted(dialog.features.items()):
            relative = f"{features_dir}/{modality}/{dialog.dialog_id}.ftrk"
            save_feature_track(track, path.parent / relative)
            track_paths[modality] = relative
        record = dialog_to_record(dialog, track_paths)
        lines.append(json.dumps(record, sort_keys=True, separators=(",", ":")))
    path.write_text("".join(line + "\n" for line in lines))
    return path


def load_corpus_jsonl(path: str | Path) -> Corpus:
    path = Path(path)
    dialogs = []
    with path.open("rt") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusError(f"{path}:{line_number}: {e.msg}") from e
            serializer = CorpusLineSerializer(data=record)
            if not serializer.is_valid():
                raise AVSDSchemaError(
                    str(record.get("dialog_id", f"line {line_number}")),
                    serializer.errors,
                )
            values = serializer.validated_data
            features = {
                modality: load_feature_track(path.parent / relative, modality)
                for modality, relative in sorted(values["features"].items())
            }
            dialogs.append(
                Dialog(
                    dialog_id=values["dialog_id"],
                    caption=tuple(values["caption"]),
                    turns=tuple(
                        Turn(
                            question=tuple(turn["question"]),
                            answer=tuple(turn["answer"]),
                            turn_index=turn_index,
                        )
                        for turn_index, turn in enumerate(values["turns"])
                    ),
                    features=features,
                )
            )
    logger.info("Loaded %d dialogs from %s", len(dialogs), path)
    return Corpus(tuple(dialogs))


def load_word_vectors(path: str | Path, vocab: Vocab) -> tuple[int, np.ndarray]:
    """Rows of tokens present in the file are its values, all others zero"""
    rows: dict[str, np.ndarray] = {}
    dim = None
    with Path(path).open("rt", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            parts = line.split()
            if not parts:
                continue
            token, raw_values = parts[0], parts[1:]
            if dim is None:
                dim = len(raw_values)
                if dim == 0:
                    raise WordVectorFormatError("No values after token", line_number)
            elif len(raw_values) != dim:
                raise WordVectorFormatError(
                    f"Expected {dim} values, got {len(raw_values)}", line_number
                )
            try:
                values = np.array([float(v) for v in raw_values], dtype=np.float64)
            except ValueError as e:
                raise WordVectorFormatError(str(e), line_number) from e
            if not np.isfinite(values).all():
                raise WordVectorFormatError("Non-finite value", line_number)
            if token in vocab:
                rows[token] = values

    if dim is None:
        raise WordVectorFormatError("Empty word-vector file", 0)
    matrix = np.zeros((len(vocab), dim), dtype=np.float64)
    for token, values in rows.items():
        matrix[vocab.token_to_id[token]] = values
    return dim, matrix


def split_corpus(
    corpus: Corpus, val_fraction: float, seed: int
) -> tuple[Corpus, Corpus]:
    """Deterministic dialog-level split into (train, validation)"""
    if not 0.0 <= val_fraction < 1.0:
        raise InvalidCorpusArgument(
            f"val_fraction must be in [0, 1), got {val_fraction}"
        )
    n_val = int(round(len(corpus) * val_fraction))
    order = np.random.default_rng(seed).permutation(len(corpus))
    val_ids = set(int(i) for i in order[:n_val])
    train = tuple(d for i, d in enumerate(corpus) if i not in val_ids)
    val = tuple(d for i, d in enumerate(corpus) if i in val_ids)
    return Corpus(train), Corpus(val)
