from django.utils.translation import gettext_lazy as _


TOPIC_MODEL_FORMAT = "scenedialog.topics"
TOPIC_MODEL_VERSION = 1


class TopicCategories:
    QUESTIONS = "questions"
    ANSWERS = "answers"
    QA_PAIRS = "qa_pairs"
    CAPTIONS = "captions"
    HISTORY = "history"
    HISTORY_CAPTIONS = "history_captions"
    ALL = "all"

    CHOICES = (
        (QUESTIONS, _("Questions")),
        (ANSWERS, _("Answers")),
        (QA_PAIRS, _("QA pairs")),
        (CAPTIONS, _("Captions")),
        (HISTORY, _("History")),
        (HISTORY_CAPTIONS, _("History and captions")),
        (ALL, _("All categories pooled")),
    )


class TopicSources:
    QUESTION = "question"
    HISTORY = "history"
    QUESTION_HISTORY = "question+history"

    CHOICES = (
        (QUESTION, _("Question")),
        (HISTORY, _("History")),
        (QUESTION_HISTORY, _("Question and history")),
    )
