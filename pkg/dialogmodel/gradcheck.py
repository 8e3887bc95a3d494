"""Finite-difference check of the full model on a tiny configuration"""
import logging
from itertools import product

import numpy as np
from corpus.constants import ReservedTokens
from dialogmodel.config import ModelConfig
from dialogmodel.constants import (
    AttentionVariants,
    TopicModes,
)
from dialogmodel.network import AVSDModel
from dialogmodel.samples import (
    Sample,
    make_batch,
)
from django.conf import settings
from nnkit.gradcheck import (
    GradCheckReport,
    grad_check,
    scaled_backward_rule,
)


logger = logging.getLogger(__name__)


def combinations() -> list[tuple[str, str]]:
    return list(
        product(dict(AttentionVariants.CHOICES), dict(TopicModes.CHOICES))
    )


def tiny_config(attention_variant: str, topic_mode: str, **overrides) -> ModelConfig:
    defaults = settings.GRADCHECK_DEFAULTS
    dim = defaults["dim"]
    values = {
        "vocab_size": defaults["vocab_size"],
        "embedding_dim": dim,
        "word_hidden_dim": dim,
        "sentence_hidden_dim": dim,
        "question_hidden_dim": dim,
        "decoder_hidden_dim": dim,
        "modality_dims": dict(defaults["modalities"]),
        "modality_projection_dim": dim,
        "av_dim": dim,
        "topic_embedding_dim": dim,
        "attention_variant": attention_variant,
        "topic_mode": topic_mode,
        "topic_count": defaults["topic_count"] if topic_mode != TopicModes.NONE else 0,
        "rng_seed": defaults["rng_seed"],
    }
    values.update(overrides)
    config = ModelConfig(**values)
    config.validate()
    return config


def tiny_samples(config: ModelConfig, rng_seed: int = 0) -> list[Sample]:
    """Two samples: a full history with every modality, and a shorter
    history with the last modality missing."""
    rng = np.random.default_rng(rng_seed)
    n_turns = settings.GRADCHECK_DEFAULTS["history_turns"]
    K = max(config.topic_count, 1)

    def ids(length: int) -> np.ndarray:
        return rng.integers(len(ReservedTokens.TOKENS), config.vocab_size, size=length)

    samples = []
    for row, turns in enumerate((n_turns, max(n_turns - 1, 0))):
        features = {
            modality: rng.uniform(-1.0, 1.0, size=dim)
            for modality, dim in config.modality_dims.items()
        }
        if row and config.modalities:
            features.pop(config.modalities[-1])
        samples.append(
            Sample(
                dialog_id=f"tiny-{row}",
                turn_index=turns,
                question=ids(3 + row),
                history=[ids(4 + position) for position in range(turns)],
                answer=ids(3 - row),
                features=features,
                theta=rng.dirichlet(np.ones(K)) if config.uses_topics else None,
                turn_thetas=(
                    [rng.dirichlet(np.ones(K)) for _ in range(turns)]
                    if config.topic_mode == TopicModes.HISTORY_FEATURE
                    else None
                ),
            )
        )
    return samples


def check_model_gradients(
    attention_variant: str,
    topic_mode: str,
    eps: float | None = None,
    coordinates_per_parameter: int | None = None,
    inject_fault: bool = False,
) -> GradCheckReport:
    defaults = settings.GRADCHECK_DEFAULTS
    eps = defaults["eps"] if eps is None else eps
    if coordinates_per_parameter is None:
        coordinates_per_parameter = defaults["coordinates_per_parameter"]
    config = tiny_config(attention_variant, topic_mode)
    model = AVSDModel(config)
    batch = make_batch(tiny_samples(config, defaults["rng_seed"]), config)

    def closure():
        return model.forward_loss(batch)

    parameters = model.store.trainable()
    if inject_fault:
        with scaled_backward_rule("matmul", 2.0):
            report = grad_check(closure, parameters, eps, coordinates_per_parameter)
    else:
        report = grad_check(closure, parameters, eps, coordinates_per_parameter)
    logger.info(
        "Gradient check %s/%s: max relative error %.3e (%s)",
        attention_variant,
        topic_mode,
        report.max_relative_error,
        report.worst_parameter,
    )
    return report
