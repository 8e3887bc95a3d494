import logging
from dataclasses import (
    dataclass,
    field,
)
from pathlib import Path

import numpy as np
from corpus.text import Vocab
from dialogmodel.config import ModelConfig
from dialogmodel.constants import CHECKPOINT_FORMAT
from dialogmodel.exceptions import (
    CheckpointLoadError,
    InvalidModelArgument,
)
from dialogmodel.network import AVSDModel
from nnkit.checkpoint import (
    load_container,
    save_container,
)
from nnkit.exceptions import (
    CheckpointFormatError,
    InvalidNNArgument,
    ShapeError,
)
from nnkit.optim import (
    Adam,
    Optimizer,
    build_optimizer,
)


logger = logging.getLogger(__name__)

MOMENT_PREFIXES = ("optimizer.m.", "optimizer.v.")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float | None = None

    def to_dict(self) -> dict:
        return {
            "epoch": self.epoch,
            "train_loss": self.train_loss,
            "val_loss": self.val_loss,
        }


@dataclass
class Checkpoint:
    model: AVSDModel
    vocab: Vocab | None = None
    epoch: int = 0
    history: list[EpochRecord] = field(default_factory=list)
    optimizer: dict | None = None
    moments: dict[str, dict[str, np.ndarray]] = field(default_factory=dict)

    def restore_optimizer(self, kind: str, learning_rate: float) -> Optimizer:
        """Optimizer over the model's trainable parameters, moments restored"""
        optimizer = build_optimizer(kind, self.model.store.trainable(), learning_rate)
        if (
            isinstance(optimizer, Adam)
            and self.optimizer
            and self.optimizer.get("kind") == kind
        ):
            optimizer.load_moments(
                self.optimizer["step"], self.moments["m"], self.moments["v"]
            )
        return optimizer


def save_checkpoint(
    path: str | Path,
    model: AVSDModel,
    vocab: Vocab | None = None,
    epoch: int = 0,
    history: list[EpochRecord] | None = None,
    optimizer: Optimizer | None = None,
) -> Path:
    header = {
        "format": CHECKPOINT_FORMAT,
        "config": model.config.to_dict(),
        "vocab": None if vocab is None else vocab.to_dict(),
        "epoch": epoch,
        "history": [record.to_dict() for record in history or []],
        "optimizer": None,
    }
    tensors = dict(model.store.state_dict())
    if optimizer is not None:
        header["optimizer"] = {
            "kind": optimizer.state.kind,
            "learning_rate": optimizer.state.learning_rate,
            "step": optimizer.state.step,
        }
        for name, value in optimizer.state.m.items():
            tensors[f"optimizer.m.{name}"] = value
        for name, value in optimizer.state.v.items():
            tensors[f"optimizer.v.{name}"] = value
    path = save_container(path, header, tensors)
    logger.info("Wrote checkpoint %s (epoch %d)", path, epoch)
    return path


def load_checkpoint(
    path: str | Path, expected_config: ModelConfig | None = None
) -> Checkpoint:
    try:
        header, tensors = load_container(path)
    except FileNotFoundError:
        raise CheckpointLoadError(f"Checkpoint {path} does not exist")
    except CheckpointFormatError as exc:
        raise CheckpointLoadError(f"Checkpoint {path}: {exc}")
    if header.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointLoadError(
            f"Checkpoint {path}: unexpected format {header.get('format')!r}"
        )
    try:
        config = ModelConfig.from_dict(header["config"])
    except (KeyError, TypeError, InvalidModelArgument) as exc:
        raise CheckpointLoadError(f"Checkpoint {path}: bad model config ({exc})")
    if expected_config is not None:
        expected_config.check_matches(config)

    model = AVSDModel(config)
    parameters = {
        name: value
        for name, value in tensors.items()
        if not name.startswith(MOMENT_PREFIXES)
    }
    try:
        model.store.load_state_dict(parameters)
    except (ShapeError, InvalidNNArgument) as exc:
        raise CheckpointLoadError(f"Checkpoint {path}: {exc}")

    moments = {"m": {}, "v": {}}
    for name, value in tensors.items():
        for key, prefix in zip(("m", "v"), MOMENT_PREFIXES):
            if name.startswith(prefix):
                moments[key][name[len(prefix):]] = value

    return Checkpoint(
        model=model,
        vocab=None if header.get("vocab") is None else Vocab.from_dict(header["vocab"]),
        epoch=header.get("epoch", 0),
        history=[EpochRecord(**record) for record in header.get("history", [])],
        optimizer=header.get("optimizer"),
        moments=moments,
    )
