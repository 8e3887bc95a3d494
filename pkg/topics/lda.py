"""Collapsed Gibbs sampling for LDA and seed-word guided LDA.

The sampler keeps three count tables: document-topic `n_dk`, topic-word
`n_kw` and topic totals `n_k`. A token is resampled from

    P(z = k) oc (n_dk + alpha) * (n_kw + beta) / (n_k + V * beta)

with the token itself removed from the counts. Guidance only touches the
initial assignments; sweeps are the plain LDA sweeps.
"""
import json
import logging
from collections import Counter
from collections.abc import (
    Mapping,
    Sequence,
)
from dataclasses import (
    dataclass,
    field,
    replace,
)
from pathlib import Path

import numpy as np
from django.conf import settings
from topics.constants import (
    TOPIC_MODEL_FORMAT,
    TOPIC_MODEL_VERSION,
)
from topics.exceptions import (
    InternalConsistencyError,
    InvalidTopicArgument,
    TopicModelFormatError,
)


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TopicParams:
    K: int
    alpha: float
    beta: float
    n_iterations: int
    seed_sets: Mapping[int, tuple[str, ...]] = field(default_factory=dict)
    seed_confidence: float = 0.0
    rng_seed: int = 0

    @classmethod
    def with_defaults(cls, **overrides) -> "TopicParams":
        defaults = settings.TOPIC_DEFAULTS
        K = overrides.pop("K", defaults["K"])
        alpha = overrides.pop("alpha", None)
        if alpha is None:
            alpha = defaults["alpha"] or 50.0 / K
        return cls(
            K=K,
            alpha=alpha,
            beta=overrides.pop("beta", defaults["beta"]),
            n_iterations=overrides.pop("n_iterations", defaults["n_iterations"]),
            seed_confidence=overrides.pop(
                "seed_confidence", defaults["seed_confidence"]
            ),
            rng_seed=overrides.pop("rng_seed", defaults["rng_seed"]),
            **overrides,
        )

    def validate(self):
        if self.K < 1:
            raise InvalidTopicArgument(f"K must be >= 1, got {self.K}")
        if self.alpha <= 0 or self.beta <= 0:
            raise InvalidTopicArgument("alpha and beta must be positive")
        if self.n_iterations < 0:
            raise InvalidTopicArgument("n_iterations must be >= 0")
        if not 0.0 <= self.seed_confidence <= 1.0:
            raise InvalidTopicArgument("seed_confidence must be in [0, 1]")
        for topic in self.seed_sets:
            if not 0 <= int(topic) < self.K:
                raise InvalidTopicArgument(
                    f"Seed topic {topic} out of range for K={self.K}"
                )

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "alpha": self.alpha,
            "beta": self.beta,
            "n_iterations": self.n_iterations,
            "seed_sets": {
                str(topic): list(words)
                for topic, words in sorted(self.seed_sets.items())
            },
            "seed_confidence": self.seed_confidence,
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TopicParams":
        return cls(
            K=int(data["K"]),
            alpha=float(data["alpha"]),
            beta=float(data["beta"]),
            n_iterations=int(data["n_iterations"]),
            seed_sets={
                int(topic): tuple(words)
                for topic, words in data.get("seed_sets", {}).items()
            },
            seed_confidence=float(data.get("seed_confidence", 0.0)),
            rng_seed=int(data.get("rng_seed", 0)),
        )


@dataclass(eq=False)
class TopicModel:
    vocab: tuple[str, ...]
    n_dk: np.ndarray
    n_kw: np.ndarray
    n_k: np.ndarray
    params: TopicParams

    def __post_init__(self):
        self.word_index = {word: idx for idx, word in enumerate(self.vocab)}

    @property
    def K(self) -> int:
        return self.params.K

    @property
    def V(self) -> int:
        return len(self.vocab)

    @property
    def phi(self) -> np.ndarray:
        beta = self.params.beta
        return (self.n_kw + beta) / (self.n_k[:, None] + self.V * beta)

    def document_theta(self, doc_id: int) -> np.ndarray:
        counts = self.n_dk[doc_id]
        alpha = self.params.alpha
        return (counts + alpha) / (counts.sum() + self.K * alpha)


def gibbs_conditional(
    model: TopicModel,
    doc_id: int,
    word_id: int,
    excluded_assignment: int | None = None,
) -> np.ndarray:
    """Topic distribution of one token given all other assignments.

    Pass the token's current topic as `excluded_assignment` when the counts
    still include it; pass None when it was already removed.
    """
    n_dk = model.n_dk[doc_id].astype(np.float64)
    n_kw = model.n_kw[:, word_id].astype(np.float64)
    n_k = model.n_k.astype(np.float64)
    if excluded_assignment is not None:
        n_dk[excluded_assignment] -= 1
        n_kw[excluded_assignment] -= 1
        n_k[excluded_assignment] -= 1
    if (n_dk < 0).any() or (n_kw < 0).any() or (n_k < 0).any():
        raise InternalConsistencyError(
            f"Negative count for doc {doc_id}, word {word_id} "
            f"after excluding topic {excluded_assignment}"
        )
    alpha, beta = model.params.alpha, model.params.beta
    weights = (n_dk + alpha) * (n_kw + beta) / (n_k + model.V * beta)
    return weights / weights.sum()


def _draw(rng: np.random.Generator, probabilities: np.ndarray) -> int:
    u = rng.random()
    idx = int(np.searchsorted(np.cumsum(probabilities), u, side="right"))
    return min(idx, len(probabilities) - 1)


def _check_counts(model: TopicModel, doc_lengths: np.ndarray):
    if (model.n_dk < 0).any() or (model.n_kw < 0).any():
        raise InternalConsistencyError("Negative count after sweep")
    if not np.array_equal(model.n_dk.sum(axis=1), doc_lengths):
        raise InternalConsistencyError("Document-topic counts != doc lengths")
    if not np.array_equal(model.n_kw.sum(axis=1), model.n_k):
        raise InternalConsistencyError("Topic-word counts != topic totals")


def _fit(
    docs: Sequence[Sequence[str]],
    params: TopicParams,
    seed_topics: Mapping[int, int],
    check_invariants: bool | None,
) -> TopicModel:
    if not docs:
        raise InvalidTopicArgument("Cannot fit a topic model on zero documents")
    vocab = tuple(sorted({word for doc in docs for word in doc}))
    if not vocab:
        raise InvalidTopicArgument("Empty vocabulary: every document is empty")
    if check_invariants is None:
        check_invariants = settings.DEBUG

    K = params.K
    index = {word: idx for idx, word in enumerate(vocab)}
    doc_words = [[index[word] for word in doc] for doc in docs]
    rng = np.random.default_rng(params.rng_seed)
    model = TopicModel(
        vocab=vocab,
        n_dk=np.zeros((len(docs), K), dtype=np.int64),
        n_kw=np.zeros((K, len(vocab)), dtype=np.int64),
        n_k=np.zeros(K, dtype=np.int64),
        params=params,
    )

    assignments = []
    for d, words in enumerate(doc_words):
        z = []
        for w in words:
            topic = int(rng.integers(K))
            seed_topic = seed_topics.get(w)
            if (
                seed_topic is not None
                and params.seed_confidence > 0
                and rng.random() < params.seed_confidence
            ):
                topic = seed_topic
            z.append(topic)
            model.n_dk[d, topic] += 1
            model.n_kw[topic, w] += 1
            model.n_k[topic] += 1
        assignments.append(z)

    doc_lengths = np.array([len(words) for words in doc_words], dtype=np.int64)
    for sweep in range(params.n_iterations):
        for d, words in enumerate(doc_words):
            z = assignments[d]
            for i, w in enumerate(words):
                old = z[i]
                model.n_dk[d, old] -= 1
                model.n_kw[old, w] -= 1
                model.n_k[old] -= 1
                new = _draw(rng, gibbs_conditional(model, d, w))
                z[i] = new
                model.n_dk[d, new] += 1
                model.n_kw[new, w] += 1
                model.n_k[new] += 1
        if check_invariants:
            _check_counts(model, doc_lengths)
        logger.debug("Gibbs sweep %d/%d done", sweep + 1, params.n_iterations)

    logger.info(
        "Fitted %d-topic model on %d documents, %d words",
        K,
        len(docs),
        len(vocab),
    )
    return model


def fit_lda(
    docs: Sequence[Sequence[str]],
    params: TopicParams,
    check_invariants: bool | None = None,
) -> TopicModel:
    params.validate()
    return _fit(docs, replace(params, seed_sets={}), {}, check_invariants)


def fit_guided_lda(
    docs: Sequence[Sequence[str]],
    params: TopicParams,
    check_invariants: bool | None = None,
) -> TopicModel:
    """LDA whose initial assignments favour each topic's seed words"""
    params.validate()
    vocab = {word for doc in docs for word in doc}
    index = {word: idx for idx, word in enumerate(sorted(vocab))}
    seed_topics: dict[int, int] = {}
    for topic in sorted(params.seed_sets):
        for word in params.seed_sets[topic]:
            if word not in index:
                logger.warning("Seed word %r (topic %d) not in vocabulary", word, topic)
                continue
            if index[word] in seed_topics:
                logger.warning(
                    "Seed word %r already seeds topic %d, ignored for topic %d",
                    word,
                    seed_topics[index[word]],
                    topic,
                )
                continue
            seed_topics[index[word]] = int(topic)
    return _fit(docs, params, seed_topics, check_invariants)


def infer_theta(
    model: TopicModel,
    doc: Sequence[str],
    n_fold_in_iterations: int,
    rng_seed: int | Sequence[int],
) -> np.ndarray:
    """Fold-in Gibbs with the topic-word counts held fixed"""
    K = model.K
    alpha, beta = model.params.alpha, model.params.beta
    words = [model.word_index[word] for word in doc if word in model.word_index]
    rng = np.random.default_rng(rng_seed)
    counts = np.zeros(K, dtype=np.float64)
    z = []
    for _ in words:
        topic = int(rng.integers(K))
        z.append(topic)
        counts[topic] += 1

    word_terms = (model.n_kw[:, words].T + beta) / (model.n_k + model.V * beta)
    for _ in range(n_fold_in_iterations):
        for i in range(len(words)):
            counts[z[i]] -= 1
            weights = (counts + alpha) * word_terms[i]
            new = _draw(rng, weights / weights.sum())
            z[i] = new
            counts[new] += 1

    return (counts + alpha) / (len(words) + K * alpha)


def top_words(model: TopicModel, k: int, n: int) -> list[str]:
    if not 0 <= k < model.K:
        raise InvalidTopicArgument(f"Topic {k} out of range for K={model.K}")
    row = model.phi[k]
    ranked = sorted(range(model.V), key=lambda w: (-row[w], model.vocab[w]))
    return [model.vocab[w] for w in ranked[:n]]


def purity(true_labels: Sequence[int], predicted_labels: Sequence[int]) -> float:
    """Share of documents in the majority true class of their predicted topic"""
    if len(true_labels) != len(predicted_labels):
        raise InvalidTopicArgument("Label sequences differ in length")
    if not true_labels:
        return 0.0
    by_topic: dict[int, Counter] = {}
    for true, predicted in zip(true_labels, predicted_labels):
        by_topic.setdefault(predicted, Counter())[true] += 1
    majority = sum(counter.most_common(1)[0][1] for counter in by_topic.values())
    return majority / len(true_labels)


def save_topic_model(model: TopicModel, path: str | Path):
    data = {
        "format": TOPIC_MODEL_FORMAT,
        "version": TOPIC_MODEL_VERSION,
        "params": model.params.to_dict(),
        "vocab": list(model.vocab),
        "n_dk": model.n_dk.tolist(),
        "n_kw": model.n_kw.tolist(),
        "n_k": model.n_k.tolist(),
    }
    Path(path).write_text(json.dumps(data, sort_keys=True))


def load_topic_model(path: str | Path) -> TopicModel:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise TopicModelFormatError(f"Malformed topic model {path}: {e}") from e
    if not isinstance(data, dict) or data.get("format") != TOPIC_MODEL_FORMAT:
        raise TopicModelFormatError(f"{path} is not a topic model file")
    if data.get("version") != TOPIC_MODEL_VERSION:
        raise TopicModelFormatError(
            f"Unsupported topic model version {data.get('version')}"
        )
    try:
        params = TopicParams.from_dict(data["params"])
        model = TopicModel(
            vocab=tuple(data["vocab"]),
            n_dk=np.array(data["n_dk"], dtype=np.int64).reshape(-1, params.K),
            n_kw=np.array(data["n_kw"], dtype=np.int64).reshape(
                params.K, len(data["vocab"])
            ),
            n_k=np.array(data["n_k"], dtype=np.int64).reshape(params.K),
            params=params,
        )
    except (KeyError, TypeError, ValueError) as e:
        raise TopicModelFormatError(f"Invalid topic model {path}: {e}") from e
    if not np.array_equal(model.n_kw.sum(axis=1), model.n_k):
        raise TopicModelFormatError(f"Inconsistent counts in {path}")
    return model
