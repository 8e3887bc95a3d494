import json
import logging
import shutil
from dataclasses import dataclass
from pathlib import Path

import tablib
from celery import group
from corpus.io import (
    save_corpus_jsonl,
    split_corpus,
)
from corpus.synth import synthesize_corpus
from corpus.text import (
    load_vocab,
    save_vocab,
)
from corpus.types import (
    Corpus,
    SynthSpec,
)
from dialogmodel.checkpoints import load_checkpoint
from dialogmodel.config import (
    DecodeOptions,
    TrainingOptions,
)
from dialogmodel.exceptions import ConfigMismatchError
from dialogmodel.generation import (
    Generation,
    generate_all,
)
from dialogmodel.gradcheck import combinations
from dialogmodel.network import AVSDModel
from dialogmodel.samples import (
    TopicContext,
    build_samples,
)
from dialogmodel.training import (
    TrainingResult,
    loss_curve,
    train,
)
from django.conf import settings
from experiments.arms import (
    ArmOutcome,
    comparison_table,
    summarize,
)
from experiments.constants import (
    GRADCHECK_HEADERS,
    TOP_WORDS_HEADERS,
    RunFiles,
    TopicKinds,
)
from experiments.exceptions import (
    ExperimentError,
    OutputExistsError,
)
from experiments.pipeline import (
    build_model_config,
    corpus_vocab,
    fit_topic_model,
    load_corpus,
    prepare_samples,
    pretrained_embeddings,
)
from experiments.presets import build_preset
from experiments.tasks import (
    check_gradients_task,
    run_arm_task,
)
from metrics.reports import (
    EvalReport,
    evaluate,
    save_report,
)
from topics.lda import (
    TopicModel,
    load_topic_model,
    save_topic_model,
    top_words,
)


logger = logging.getLogger(__name__)


def prepare_output_dir(out: str | Path, force: bool) -> Path:
    out = Path(out)
    if out.exists() and any(out.iterdir()):
        if not force:
            raise OutputExistsError(out)
        logger.warning("Overwriting %s", out)
        shutil.rmtree(out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def run_group(signatures: list) -> list:
    """Results of a task group in submission order"""
    result = group(signatures).apply_async()
    return [child.get() for child in result.results]


def write_json(path: Path, data) -> Path:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return path


def write_config_echo(out: Path, config: dict) -> Path:
    return write_json(out / RunFiles.CONFIG, config)


@dataclass
class SynthResult:
    corpus_path: Path
    n_dialogs: int
    n_turns: int
    modalities: list[str]


def run_synth(config: dict, out: Path) -> SynthResult:
    spec = SynthSpec(**config["spec"], rng_seed=config["rng_seed"])
    corpus = synthesize_corpus(spec)
    path = save_corpus_jsonl(corpus, out / settings.CORPUS_DEFAULTS["corpus_filename"])
    return SynthResult(
        corpus_path=path,
        n_dialogs=len(corpus),
        n_turns=corpus.n_turns(),
        modalities=list(corpus.modality_dims()),
    )


def top_words_table(model: TopicModel, n: int) -> tablib.Dataset:
    dataset = tablib.Dataset(headers=list(TOP_WORDS_HEADERS))
    phi = model.phi
    for topic in range(model.K):
        for rank, word in enumerate(top_words(model, topic, n), start=1):
            dataset.append([topic, rank, word, float(phi[topic, model.word_index[word]])])
    return dataset


@dataclass
class TopicsResult:
    model_path: Path
    guided: bool
    top_words: list[list[str]]


def run_topics(config: dict, out: Path) -> TopicsResult:
    corpus = load_corpus(config["corpus"], config["feature_dirs"])
    block = config["params"]
    kind = TopicKinds.GUIDED if block["seed_sets"] else TopicKinds.LDA
    model, _ = fit_topic_model(
        corpus, block, kind, config["rng_seed"], seed_sets=block["seed_sets"]
    )
    path = out / RunFiles.TOPIC_MODEL
    save_topic_model(model, path)
    (out / RunFiles.TOP_WORDS).write_text(
        top_words_table(model, block["top_n"]).export("csv")
    )
    return TopicsResult(
        model_path=path,
        guided=kind == TopicKinds.GUIDED,
        top_words=[top_words(model, topic, block["top_n"]) for topic in range(model.K)],
    )


def _split(config: dict, corpus: Corpus) -> tuple[Corpus, Corpus]:
    if config.get("val_corpus"):
        return corpus, load_corpus(config["val_corpus"], config["feature_dirs"])
    return split_corpus(corpus, config["val_fraction"], config["rng_seed"])


def run_train(config: dict, out: Path) -> TrainingResult:
    seed = config["rng_seed"]
    train_corpus, val_corpus = _split(
        config, load_corpus(config["corpus"], config["feature_dirs"])
    )
    topic_model = (
        load_topic_model(config["topic_model"]) if config.get("topic_model") else None
    )
    vocab = corpus_vocab(train_corpus)
    model_config = build_model_config(
        vocab, train_corpus, config["model"], seed, topic_model
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
    options = TrainingOptions(**config["training"], rng_seed=seed)

    checkpoint = None
    if config.get("resume"):
        checkpoint = load_checkpoint(config["resume"], expected_config=model_config)
        if checkpoint.vocab is not None and checkpoint.vocab != vocab:
            raise ConfigMismatchError(
                {"vocab": (f"{len(vocab)} tokens", f"{len(checkpoint.vocab)} tokens")}
            )
        model = checkpoint.model
    else:
        pretrained = (
            pretrained_embeddings(config["word_vectors"], vocab, model_config)
            if config.get("word_vectors")
            else None
        )
        model = AVSDModel(model_config, pretrained_embeddings=pretrained)

    save_vocab(vocab, out / RunFiles.VOCAB)
    result = train(
        model,
        train_samples,
        options,
        val_samples or None,
        out_dir=out,
        vocab=vocab,
        resume=checkpoint,
    )
    (out / RunFiles.LOSS_CURVE).write_text(loss_curve(result.history).export("csv"))
    return result


def run_generate(config: dict, out: Path) -> list[Generation]:
    checkpoint = load_checkpoint(config["checkpoint"])
    vocab = checkpoint.vocab
    if vocab is None:
        raise ExperimentError(f"Checkpoint {config['checkpoint']} carries no vocabulary")
    if config.get("vocab"):
        expected = load_vocab(config["vocab"])
        if expected != vocab:
            raise ConfigMismatchError(
                {"vocab": (f"{len(expected)} tokens", f"{len(vocab)} tokens")}
            )
    model = checkpoint.model
    model_config = model.config
    corpus = load_corpus(config["corpus"], config["feature_dirs"])
    context = None
    if model_config.uses_topics:
        if not config.get("topic_model"):
            raise ExperimentError(
                f"topic_mode {model_config.topic_mode} needs a topic_model"
            )
        context = TopicContext(
            load_topic_model(config["topic_model"]),
            model_config.topic_source,
            config["fold_in_iterations"],
            config["rng_seed"],
        )
    samples = build_samples(corpus, vocab, model_config, context)
    generations = generate_all(model, samples, vocab, DecodeOptions(**config["decode"]))
    (out / RunFiles.GENERATIONS).write_text(
        "".join(
            json.dumps(generation.to_record(), sort_keys=True) + "\n"
            for generation in generations
        )
    )
    return generations


def run_evaluate(config: dict, out: Path) -> EvalReport:
    corpus = load_corpus(config["corpus"], config["feature_dirs"])
    report = evaluate(config["hypotheses"], corpus, config["subsets"])
    save_report(report, out)
    return report


def run_gradcheck(config: dict, out: Path | None) -> list[dict]:
    """All (attention variant, topic mode) combinations, one task each"""
    tolerance = config["tolerance"]
    signatures = [
        check_gradients_task.s(
            variant,
            mode,
            config["eps"],
            config["coordinates_per_parameter"],
            config["inject_fault"],
        )
        for variant, mode in combinations()
    ]
    rows = [
        {**result, "passed": result["max_relative_error"] <= tolerance}
        for result in run_group(signatures)
    ]
    if out is not None:
        write_json(
            out / RunFiles.GRADCHECK, {"tolerance": tolerance, "combinations": rows}
        )
    return rows


def gradcheck_table(rows: list[dict]) -> tablib.Dataset:
    dataset = tablib.Dataset(headers=list(GRADCHECK_HEADERS))
    for row in rows:
        dataset.append(
            [
                row["attention_variant"],
                row["topic_mode"],
                f"{row['max_relative_error']:.3e}",
                row["worst_parameter"] or "",
                ",".join(str(index) for index in row["worst_index"]),
                "yes" if row["passed"] else "NO",
            ]
        )
    return dataset


def run_compare(config: dict, resolved: dict, out: Path) -> dict:
    """Fans out one task per (arm, seed); results merge in submission order"""
    preset = build_preset(config["preset"], config["topic_counts"])
    signatures = [
        run_arm_task.s(resolved, arm.name, seed)
        for arm in preset.arms
        for seed in config["seeds"]
    ]
    outcomes = [
        ArmOutcome.from_dict(data) for data in run_group(signatures)
    ]
    (out / RunFiles.COMPARISON).write_text(comparison_table(outcomes).export("csv"))
    summary = summarize(preset, outcomes)
    write_json(out / RunFiles.SUMMARY, summary)
    return summary
