"""Question-based subsets of evaluation pairs or training samples.

Items may be anything carrying the question tokens, either as
`question_tokens` (samples) or `question` (evaluation pairs).
"""
from collections.abc import (
    Callable,
    Iterable,
    Sequence,
)
from typing import TypeVar

from django.conf import settings
from metrics.binary import classify_binary
from metrics.constants import (
    BinaryClasses,
    Subsets,
)
from metrics.exceptions import InvalidMetricArgument
from metrics.types import EvalPair


Item = TypeVar("Item")


def question_tokens(item) -> tuple[str, ...]:
    tokens = getattr(item, "question_tokens", None)
    if tokens is None:
        tokens = getattr(item, "question")
    return tuple(tokens)


def _filter_by_words(items: Iterable[Item], words: Iterable[str]) -> list[Item]:
    words = set(words)
    return [item for item in items if words.intersection(question_tokens(item))]


def filter_coreference(items: Iterable[Item], pronouns: Iterable[str] | None = None) -> list[Item]:
    if pronouns is None:
        pronouns = settings.METRIC_DEFAULTS["coreference_pronouns"]
    return _filter_by_words(items, pronouns)


def filter_audio_related(items: Iterable[Item], keywords: Iterable[str] | None = None) -> list[Item]:
    if keywords is None:
        keywords = settings.METRIC_DEFAULTS["audio_keywords"]
    return _filter_by_words(items, keywords)


def filter_binary(pairs: Iterable[EvalPair]) -> list[EvalPair]:
    return [
        pair
        for pair in pairs
        if classify_binary(pair.references[0]) != BinaryClasses.OTHER
    ]


SUBSET_FILTERS: dict[str, Callable[[Sequence], list]] = {
    Subsets.COREFERENCE: filter_coreference,
    Subsets.AUDIO: filter_audio_related,
    Subsets.BINARY: filter_binary,
}


def subset_filter(name: str) -> Callable[[Sequence], list]:
    try:
        return SUBSET_FILTERS[name]
    except KeyError:
        raise InvalidMetricArgument(
            f"Unknown subset {name}, expected one of {', '.join(SUBSET_FILTERS)}"
        ) from None
