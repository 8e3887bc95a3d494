from collections.abc import (
    Iterable,
    Sequence,
)
from dataclasses import (
    asdict,
    dataclass,
)

from django.conf import settings
from metrics.constants import BinaryClasses
from metrics.types import (
    EvalPair,
    Tokens,
)


def classify_binary(
    tokens: Tokens,
    yes_tokens: Iterable[str] | None = None,
    no_tokens: Iterable[str] | None = None,
) -> str:
    """Yes/No/Other from the first token of an answer"""
    if not tokens:
        return BinaryClasses.OTHER
    if yes_tokens is None:
        yes_tokens = settings.METRIC_DEFAULTS["yes_tokens"]
    if no_tokens is None:
        no_tokens = settings.METRIC_DEFAULTS["no_tokens"]
    first = tokens[0].lower()
    if first in set(yes_tokens):
        return BinaryClasses.YES
    if first in set(no_tokens):
        return BinaryClasses.NO
    return BinaryClasses.OTHER


@dataclass(frozen=True)
class BinaryScores:
    precision: float | None
    recall: float | None
    f1: float | None
    support: int

    def to_dict(self) -> dict:
        return asdict(self)


def _ratio(numerator: int, denominator: int) -> float:
    return numerator / denominator if denominator else 0.0


def binary_prf(pairs: Sequence[EvalPair]) -> BinaryScores:
    """Precision, recall and F1 with Yes as the positive class over the
    pairs whose reference is Yes or No.

    Other hypotheses are never a Yes prediction, so they only count as
    misses on Yes references.
    """
    true_positive = false_positive = false_negative = support = 0
    for pair in pairs:
        reference = classify_binary(pair.references[0])
        if reference == BinaryClasses.OTHER:
            continue
        support += 1
        predicted_yes = classify_binary(pair.hypothesis) == BinaryClasses.YES
        if reference == BinaryClasses.YES:
            if predicted_yes:
                true_positive += 1
            else:
                false_negative += 1
        elif predicted_yes:
            false_positive += 1

    if support == 0:
        return BinaryScores(precision=None, recall=None, f1=None, support=0)
    precision = _ratio(true_positive, true_positive + false_positive)
    recall = _ratio(true_positive, true_positive + false_negative)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return BinaryScores(precision=precision, recall=recall, f1=f1, support=support)
