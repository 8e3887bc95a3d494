import logging
from dataclasses import (
    asdict,
    dataclass,
)

import numpy as np
import tablib
from corpus.io import split_corpus
from corpus.synth import synthesize_corpus
from corpus.types import SynthSpec
from dialogmodel.config import (
    DecodeOptions,
    TrainingOptions,
)
from dialogmodel.constants import DecodeModes
from dialogmodel.generation import generate_all
from dialogmodel.network import AVSDModel
from dialogmodel.training import (
    evaluate_loss,
    train,
)
from experiments.constants import (
    COMPARISON_HEADERS,
    Measures,
    TopicKinds,
)
from experiments.pipeline import (
    build_model_config,
    corpus_vocab,
    fit_topic_model,
    generation_pairs,
    guided_seed_sets,
    prepare_samples,
    pretrained_embeddings,
    strip_modality,
    topic_purity,
)
from experiments.presets import (
    Preset,
    build_preset,
)
from metrics.binary import binary_prf
from metrics.filters import (
    filter_audio_related,
    filter_coreference,
)


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ArmOutcome:
    arm: str
    seed: int
    measures: dict[str, float | None]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ArmOutcome":
        return cls(arm=data["arm"], seed=int(data["seed"]), measures=dict(data["measures"]))


def run_arm(config: dict, arm_name: str, seed: int) -> ArmOutcome:
    """Synthesize, fit topics if the arm needs them, train and measure one
    arm of a comparison on one seed.
    """
    preset = build_preset(config["preset"], config["topic_counts"])
    arm = preset.arm(arm_name)
    spec = SynthSpec(**config["synth"], rng_seed=seed)
    corpus = synthesize_corpus(spec)
    if not arm.use_audio:
        corpus = strip_modality(corpus, "audio")
    train_corpus, val_corpus = split_corpus(corpus, config["val_fraction"], seed)

    topic_model = None
    measures: dict[str, float | None] = dict.fromkeys(Measures.ORDER)
    if arm.topics != TopicKinds.NONE:
        K = arm.topic_count or config["topics"]["K"]
        seed_sets = (
            guided_seed_sets(K, spec.n_topic_clusters)
            if arm.topics == TopicKinds.GUIDED
            else {}
        )
        topic_model, documents = fit_topic_model(
            train_corpus, config["topics"], arm.topics, seed, K=K, seed_sets=seed_sets
        )
        measures[Measures.TOPIC_PURITY] = topic_purity(
            topic_model, train_corpus, documents, spec.n_topic_clusters
        )

    vocab = corpus_vocab(train_corpus)
    model_config = build_model_config(
        vocab, train_corpus, {**config["model"], **arm.model}, seed, topic_model
    )
    train_samples, val_samples = prepare_samples(
        train_corpus,
        val_corpus,
        vocab,
        model_config,
        topic_model,
        config["fold_in_iterations"],
        seed,
    )
    pretrained = None
    if arm.word_vectors:
        if config.get("word_vectors"):
            pretrained = pretrained_embeddings(config["word_vectors"], vocab, model_config)
        else:
            logger.warning("Arm %s runs without word vectors: none configured", arm.name)
    model = AVSDModel(model_config, pretrained_embeddings=pretrained)
    options = TrainingOptions(**config["training"], rng_seed=seed)
    result = train(model, train_samples, options, val_samples or None)

    batch_size = options.batch_size
    measures[Measures.FINAL_TRAIN_LOSS] = (
        result.history[-1].train_loss
        if result.history
        else evaluate_loss(model, train_samples, batch_size)
    )
    if val_samples:
        measures[Measures.VAL_LOSS] = evaluate_loss(model, val_samples, batch_size)
    audio_samples = filter_audio_related(val_samples)
    if audio_samples:
        measures[Measures.AUDIO_VAL_LOSS] = evaluate_loss(model, audio_samples, batch_size)
    coref_samples = filter_coreference(val_samples)
    if coref_samples:
        generations = generate_all(
            model, coref_samples, vocab, DecodeOptions.with_defaults(mode=DecodeModes.GREEDY)
        )
        measures[Measures.COREF_BINARY_F1] = binary_prf(generation_pairs(generations)).f1

    logger.info("Arm %s seed %d: %s", arm.name, seed, measures)
    return ArmOutcome(arm=arm.name, seed=seed, measures=measures)


def _beats(measure: str, value: float | None, reference: float | None) -> bool:
    if value is None or reference is None:
        return False
    if measure in Measures.LOWER_IS_BETTER:
        return value < reference
    return value > reference


def summarize(preset: Preset, outcomes: list[ArmOutcome]) -> dict:
    """Per-arm means and, per measure, the number of seeds on which the arm
    beats the preset's reference arm.
    """
    reference = {
        outcome.seed: outcome.measures
        for outcome in outcomes
        if outcome.arm == preset.reference
    }
    arms = {}
    for arm in preset.arms:
        rows = [outcome for outcome in outcomes if outcome.arm == arm.name]
        means, wins = {}, {}
        for measure in Measures.ORDER:
            values = [row.measures[measure] for row in rows if row.measures[measure] is not None]
            means[measure] = float(np.mean(values)) if values else None
            wins[measure] = sum(
                _beats(measure, row.measures[measure], reference.get(row.seed, {}).get(measure))
                for row in rows
            )
        arms[arm.name] = {"means": means, "wins": wins, "n_seeds": len(rows)}
    return {
        "preset": preset.name,
        "reference_arm": preset.reference,
        "seeds": sorted({outcome.seed for outcome in outcomes}),
        "arms": arms,
    }


def comparison_table(outcomes: list[ArmOutcome]) -> tablib.Dataset:
    dataset = tablib.Dataset(headers=list(COMPARISON_HEADERS))
    for outcome in outcomes:
        dataset.append(
            [outcome.arm, outcome.seed]
            + [
                "" if outcome.measures[measure] is None else outcome.measures[measure]
                for measure in Measures.ORDER
            ]
        )
    return dataset
