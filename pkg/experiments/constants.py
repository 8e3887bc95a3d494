from django.utils.translation import gettext_lazy as _


class RunFiles:
    CONFIG = "config.json"
    TOPIC_MODEL = "topics.json"
    TOP_WORDS = "top_words.csv"
    VOCAB = "vocab.json"
    LOSS_CURVE = "loss_curve.csv"
    GENERATIONS = "generations.jsonl"
    GRADCHECK = "gradcheck.json"
    COMPARISON = "comparison.csv"
    SUMMARY = "summary.json"


class Presets:
    ATTENTION = "attention"
    TOPICS = "topics"
    AUDIO = "audio"
    TOPIC_COUNT = "topic_count"

    CHOICES = (
        (ATTENTION, _("Attention variants")),
        (TOPICS, _("Topic features")),
        (AUDIO, _("Audio track")),
        (TOPIC_COUNT, _("Topic count sweep")),
    )


class TopicKinds:
    NONE = "none"
    LDA = "lda"
    GUIDED = "guided"

    CHOICES = (
        (NONE, _("No topic model")),
        (LDA, _("Standard LDA")),
        (GUIDED, _("Guided LDA")),
    )


class Measures:
    VAL_LOSS = "val_loss"
    AUDIO_VAL_LOSS = "audio_val_loss"
    COREF_BINARY_F1 = "coref_binary_f1"
    TOPIC_PURITY = "topic_purity"
    FINAL_TRAIN_LOSS = "final_train_loss"

    ORDER = (VAL_LOSS, AUDIO_VAL_LOSS, COREF_BINARY_F1, TOPIC_PURITY, FINAL_TRAIN_LOSS)
    LOWER_IS_BETTER = frozenset((VAL_LOSS, AUDIO_VAL_LOSS, FINAL_TRAIN_LOSS))


TOP_WORDS_HEADERS = ("topic", "rank", "word", "probability")
COMPARISON_HEADERS = ("arm", "seed") + Measures.ORDER
GRADCHECK_HEADERS = (
    "attention_variant",
    "topic_mode",
    "max_relative_error",
    "worst_parameter",
    "worst_index",
    "passed",
)
TOPIC_COUNT_SWEEP = (5, 7, 9, 11)
