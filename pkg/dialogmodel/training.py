import logging
from collections.abc import Sequence
from dataclasses import (
    dataclass,
    field,
)
from pathlib import Path

import numpy as np
import tablib
from corpus.text import Vocab
from dialogmodel.checkpoints import (
    Checkpoint,
    EpochRecord,
    save_checkpoint,
)
from dialogmodel.config import TrainingOptions
from dialogmodel.constants import (
    BEST_CHECKPOINT_NAME,
    CHECKPOINTS_DIRNAME,
    LOSS_CURVE_HEADERS,
)
from dialogmodel.exceptions import InvalidModelArgument
from dialogmodel.network import AVSDModel
from dialogmodel.samples import (
    Sample,
    make_batch,
)
from more_itertools import ichunked
from nnkit.optim import (
    Optimizer,
    build_optimizer,
    optimizer_step,
)
from nnkit.tensor import Tape


logger = logging.getLogger(__name__)


def epoch_checkpoint_name(epoch: int) -> str:
    return f"epoch-{epoch:04d}.ckpt"


def iter_batches(
    samples: Sequence[Sample], batch_size: int, order: Sequence[int] | None = None
):
    if order is None:
        order = range(len(samples))
    for chunk in ichunked(order, batch_size):
        yield [samples[index] for index in chunk]


def evaluate_loss(
    model: AVSDModel, samples: Sequence[Sample], batch_size: int
) -> float:
    """Token-weighted mean loss; no tape is recorded"""
    if not samples:
        raise InvalidModelArgument("No samples to evaluate")
    total, n_tokens = 0.0, 0
    for chunk in iter_batches(samples, batch_size):
        batch = make_batch(chunk, model.config)
        total += model.forward_loss(batch).item() * batch.n_target_tokens
        n_tokens += batch.n_target_tokens
    return total / n_tokens


def loss_curve(history: Sequence[EpochRecord]) -> tablib.Dataset:
    dataset = tablib.Dataset(headers=list(LOSS_CURVE_HEADERS))
    for record in history:
        dataset.append(
            [
                record.epoch,
                record.train_loss,
                "" if record.val_loss is None else record.val_loss,
            ]
        )
    return dataset


@dataclass
class TrainingResult:
    history: list[EpochRecord] = field(default_factory=list)
    best_epoch: int | None = None
    best_loss: float | None = None
    checkpoints: list[Path] = field(default_factory=list)

    @property
    def losses(self) -> list[float]:
        return [record.train_loss for record in self.history]


class Trainer:
    """Mini-batch training with per-epoch shuffles seeded by (seed, epoch).

    The best epoch is chosen on validation loss, or on training loss when
    there is no validation split.
    """

    def __init__(
        self,
        model: AVSDModel,
        options: TrainingOptions,
        out_dir: str | Path | None = None,
        vocab: Vocab | None = None,
        resume: Checkpoint | None = None,
    ):
        options.validate()
        self.model = model
        self.options = options
        self.vocab = vocab
        self.checkpoint_dir = (
            None if out_dir is None else Path(out_dir) / CHECKPOINTS_DIRNAME
        )
        if resume is not None:
            if resume.model is not model:
                raise InvalidModelArgument("Resume with the checkpoint's own model")
            self.optimizer: Optimizer = resume.restore_optimizer(
                options.optimizer, options.learning_rate
            )
            self.start_epoch = resume.epoch
            history = list(resume.history)
        else:
            self.optimizer = build_optimizer(
                options.optimizer, model.store.trainable(), options.learning_rate
            )
            self.start_epoch = 0
            history = []
        self.result = TrainingResult(history=history)
        for record in history:
            self._track_best(record)

    def _track_best(self, record: EpochRecord) -> bool:
        monitored = record.train_loss if record.val_loss is None else record.val_loss
        if self.result.best_loss is None or monitored < self.result.best_loss:
            self.result.best_loss = monitored
            self.result.best_epoch = record.epoch
            return True
        return False

    def epoch_order(self, epoch: int, n_samples: int) -> np.ndarray:
        rng = np.random.default_rng([self.options.rng_seed, epoch])
        return rng.permutation(n_samples)

    def train_epoch(self, epoch: int, samples: Sequence[Sample]) -> float:
        total, n_tokens = 0.0, 0
        order = self.epoch_order(epoch, len(samples))
        for chunk in iter_batches(samples, self.options.batch_size, order):
            batch = make_batch(chunk, self.model.config)
            with Tape() as tape:
                loss = self.model.forward_loss(batch)
            tape.backward(loss)
            optimizer_step(self.optimizer)
            total += loss.item() * batch.n_target_tokens
            n_tokens += batch.n_target_tokens
        return total / n_tokens

    def save(self, name: str, epoch: int) -> Path:
        path = save_checkpoint(
            self.checkpoint_dir / name,
            self.model,
            vocab=self.vocab,
            epoch=epoch,
            history=self.result.history,
            optimizer=self.optimizer,
        )
        self.result.checkpoints.append(path)
        return path

    def run(
        self,
        train_samples: Sequence[Sample],
        val_samples: Sequence[Sample] | None = None,
    ) -> TrainingResult:
        if not train_samples:
            raise InvalidModelArgument("Cannot train on an empty corpus")
        for epoch in range(self.start_epoch + 1, self.options.epochs + 1):
            train_loss = self.train_epoch(epoch, train_samples)
            val_loss = (
                evaluate_loss(self.model, val_samples, self.options.batch_size)
                if val_samples
                else None
            )
            record = EpochRecord(epoch=epoch, train_loss=train_loss, val_loss=val_loss)
            self.result.history.append(record)
            logger.info(
                "Epoch %d: train loss %.6f, val loss %s",
                epoch,
                train_loss,
                "-" if val_loss is None else f"{val_loss:.6f}",
            )
            improved = self._track_best(record)
            if self.checkpoint_dir is None:
                continue
            every = self.options.checkpoint_every
            if every and epoch % every == 0:
                self.save(epoch_checkpoint_name(epoch), epoch)
            if improved:
                self.save(BEST_CHECKPOINT_NAME, epoch)
        return self.result


def train(
    model: AVSDModel,
    train_samples: Sequence[Sample],
    options: TrainingOptions,
    val_samples: Sequence[Sample] | None = None,
    out_dir: str | Path | None = None,
    vocab: Vocab | None = None,
    resume: Checkpoint | None = None,
) -> TrainingResult:
    trainer = Trainer(model, options, out_dir=out_dir, vocab=vocab, resume=resume)
    return trainer.run(train_samples, val_samples)
