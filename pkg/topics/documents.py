"""Topic-model documents cut from a corpus.

One category per text source the dialog system sees. Stopwords and
punctuation never reach the topic model.
"""
from collections.abc import (
    Collection,
    Iterable,
)
from dataclasses import dataclass

from corpus.constants import PUNCTUATION
from corpus.types import (
    Corpus,
    Dialog,
)
from django.conf import settings
from topics.constants import (
    TopicCategories,
    TopicSources,
)
from topics.exceptions import InvalidTopicArgument


@dataclass(frozen=True)
class TopicDocument:
    dialog_id: str
    words: tuple[str, ...]


def clean_words(
    tokens: Iterable[str], stopwords: Collection[str] | None = None
) -> tuple[str, ...]:
    if stopwords is None:
        stopwords = settings.TOPIC_STOPWORDS
    return tuple(
        token
        for token in tokens
        if token not in stopwords and token not in PUNCTUATION
    )


def _dialog_text(dialog: Dialog, category: str) -> list[tuple[str, ...]]:
    turns = dialog.turns
    if category == TopicCategories.QUESTIONS:
        return [sum((turn.question for turn in turns), ())]
    if category == TopicCategories.ANSWERS:
        return [sum((turn.answer for turn in turns), ())]
    if category == TopicCategories.QA_PAIRS:
        return [turn.question + turn.answer for turn in turns]
    if category == TopicCategories.CAPTIONS:
        return [dialog.caption]
    history = sum((turn.question + turn.answer for turn in turns), ())
    if category == TopicCategories.HISTORY:
        return [history]
    if category == TopicCategories.HISTORY_CAPTIONS:
        return [dialog.caption + history]
    raise InvalidTopicArgument(f"Unknown topic category: {category}")


def category_documents(
    corpus: Corpus,
    category: str,
    stopwords: Collection[str] | None = None,
) -> list[TopicDocument]:
    """Documents of one category; `all` pools every per-category set"""
    if category == TopicCategories.ALL:
        documents = []
        for sub_category, _ in TopicCategories.CHOICES:
            if sub_category in (
                TopicCategories.ALL,
                TopicCategories.HISTORY_CAPTIONS,
            ):
                continue
            documents.extend(category_documents(corpus, sub_category, stopwords))
        return documents

    return [
        TopicDocument(dialog.dialog_id, clean_words(text, stopwords))
        for dialog in corpus
        for text in _dialog_text(dialog, category)
    ]


def sample_document(
    dialog: Dialog,
    turn_position: int,
    topic_source: str,
    stopwords: Collection[str] | None = None,
) -> tuple[str, ...]:
    """Words folded in for the question at `turn_position` of a dialog.

    The history side covers the caption and every earlier turn.
    """
    if topic_source not in dict(TopicSources.CHOICES):
        raise InvalidTopicArgument(f"Unknown topic source: {topic_source}")
    words: tuple[str, ...] = ()
    if topic_source in (TopicSources.HISTORY, TopicSources.QUESTION_HISTORY):
        words += dialog.caption
        for turn in dialog.turns[:turn_position]:
            words += turn.question + turn.answer
    if topic_source in (TopicSources.QUESTION, TopicSources.QUESTION_HISTORY):
        words += dialog.turns[turn_position].question
    return clean_words(words, stopwords)


def turn_document(
    dialog: Dialog, turn_position: int, stopwords: Collection[str] | None = None
) -> tuple[str, ...]:
    turn = dialog.turns[turn_position]
    return clean_words(turn.question + turn.answer, stopwords)
